#include "mra/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <string>

namespace mra {

Mat Mat::from_rows(const std::vector<Vec>& rows) {
    Mat m;
    m.nrows = rows.size();
    m.ncols = rows.empty() ? 0 : rows[0].size();
    m.a.reserve(m.nrows * m.ncols);
    for (const Vec& r : rows) {
        if (r.size() != m.ncols) throw DimensionMismatch("ragged row input");
        m.a.insert(m.a.end(), r.begin(), r.end());
    }
    return m;
}

Subspace zero_subspace(std::size_t ambient) {
    Subspace s;
    s.ambient = ambient;
    s.basis = Mat(0, ambient);
    return s;
}

Subspace full_space(std::size_t ambient) {
    Subspace s;
    s.ambient = ambient;
    s.basis = Mat::identity(ambient);
    return s;
}

Vec unit_vector(std::size_t ambient, std::size_t index) {
    Vec v(ambient, 0);
    v.at(index) = 1;
    return v;
}

namespace detail {

void rref_generic(const Field& f, Mat& m) {
    std::size_t r = 0;
    for (std::size_t col = 0; col < m.ncols && r < m.nrows; ++col) {
        std::size_t p = r;
        while (p < m.nrows && m.at(p, col) == 0) ++p;
        if (p == m.nrows) continue;
        if (p != r) {
            for (std::size_t j = 0; j < m.ncols; ++j) std::swap(m.at(p, j), m.at(r, j));
        }
        const Elem scale = f.inv(m.at(r, col));
        if (scale != 1) {
            for (std::size_t j = col; j < m.ncols; ++j) m.at(r, j) = f.mul(m.at(r, j), scale);
        }
        for (std::size_t i = 0; i < m.nrows; ++i) {
            if (i == r) continue;
            const Elem c = m.at(i, col);
            if (c == 0) continue;
            // char 2: subtraction is addition
            for (std::size_t j = col; j < m.ncols; ++j) {
                m.at(i, j) = f.add(m.at(i, j), f.mul(c, m.at(r, j)));
            }
        }
        ++r;
    }
    m.a.resize(r * m.ncols);
    m.nrows = r;
}

std::uint64_t pack_row(std::span<const Elem> row) {
    std::uint64_t w = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] != 0) w |= std::uint64_t{1} << i;
    }
    return w;
}

void rref_bitpacked(Mat& m) {
    if (m.ncols > 64) throw DimensionMismatch("bit-packed kernel limited to 64 columns");
    std::vector<std::uint64_t> w(m.nrows);
    for (std::size_t i = 0; i < m.nrows; ++i) w[i] = pack_row(m.row(i));
    std::size_t r = 0;
    for (std::size_t col = 0; col < m.ncols && r < w.size(); ++col) {
        const std::uint64_t bit = std::uint64_t{1} << col;
        std::size_t p = r;
        while (p < w.size() && !(w[p] & bit)) ++p;
        if (p == w.size()) continue;
        std::swap(w[p], w[r]);
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i != r && (w[i] & bit)) w[i] ^= w[r];
        }
        ++r;
    }
    Mat out(r, m.ncols);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < m.ncols; ++j) {
            out.at(i, j) = static_cast<Elem>((w[i] >> j) & 1);
        }
    }
    m = std::move(out);
}

void for_each_rref_matrix(const Field& f, unsigned D, unsigned d,
                          const std::function<void(const Mat&)>& fn) {
    if (d > D) return;
    const unsigned q = f.order();
    if (d == 0) {
        fn(Mat(0, D));
        return;
    }
    std::vector<unsigned> piv(d);
    for (unsigned i = 0; i < d; ++i) piv[i] = i;
    Mat m(d, D);
    while (true) {
        std::vector<std::pair<unsigned, unsigned>> freepos;
        for (unsigned i = 0; i < d; ++i) {
            for (unsigned j = piv[i] + 1; j < D; ++j) {
                if (std::find(piv.begin(), piv.end(), j) == piv.end()) freepos.emplace_back(i, j);
            }
        }
        std::vector<Elem> vals(freepos.size(), 0);
        while (true) {
            std::fill(m.a.begin(), m.a.end(), 0);
            for (unsigned i = 0; i < d; ++i) m.at(i, piv[i]) = 1;
            for (std::size_t t = 0; t < freepos.size(); ++t) {
                m.at(freepos[t].first, freepos[t].second) = vals[t];
            }
            fn(m);
            std::size_t t = 0;
            while (t < vals.size()) {
                if (++vals[t] < q) break;
                vals[t] = 0;
                ++t;
            }
            if (t == vals.size()) break;
        }
        int i = static_cast<int>(d) - 1;
        while (i >= 0 && piv[i] == D - d + static_cast<unsigned>(i)) --i;
        if (i < 0) break;
        ++piv[i];
        for (unsigned j = i + 1; j < d; ++j) piv[j] = piv[j - 1] + 1;
    }
}

PackedBasis PackedBasis::from(const Subspace& s) {
    PackedBasis b;
    b.rows.resize(s.dim());
    b.pivot_bit.resize(s.dim());
    for (std::size_t i = 0; i < s.dim(); ++i) {
        b.rows[i] = pack_row(s.basis.row(i));
        b.pivot_bit[i] = b.rows[i] & ~(b.rows[i] - 1);  // lowest set bit
        b.pivot_mask |= b.pivot_bit[i];
    }
    return b;
}

namespace {

void rref_dispatch(const Field& f, Mat& m) {
    if (f.order() == 2 && m.ncols <= 64) {
        rref_bitpacked(m);
    } else {
        rref_generic(f, m);
    }
}

std::size_t pivot_col(const Mat& m, std::size_t row) {
    for (std::size_t j = 0; j < m.ncols; ++j) {
        if (m.at(row, j) != 0) return j;
    }
    return m.ncols;
}

}  // namespace
}  // namespace detail

Subspace canonicalize(const Field& f, const Mat& rows, std::size_t ambient) {
    if (rows.nrows != 0 && rows.ncols != ambient) {
        throw DimensionMismatch("row length != ambient dimension");
    }
    Subspace s;
    s.ambient = ambient;
    s.basis = rows;
    s.basis.ncols = ambient;
    detail::rref_dispatch(f, s.basis);
    return s;
}

Subspace canonicalize(const Field& f, const std::vector<Vec>& rows, std::size_t ambient) {
    return canonicalize(f, Mat::from_rows(rows), ambient);
}

Subspace sum(const Field& f, const Subspace& a, const Subspace& b) {
    if (a.ambient != b.ambient) throw DimensionMismatch("sum: ambient mismatch");
    Mat stacked(a.dim() + b.dim(), a.ambient);
    std::copy(a.basis.a.begin(), a.basis.a.end(), stacked.a.begin());
    std::copy(b.basis.a.begin(), b.basis.a.end(), stacked.a.begin() + a.basis.a.size());
    return canonicalize(f, stacked, a.ambient);
}

Mat left_nullspace(const Field& f, const Mat& c) {
    const std::size_t m = c.nrows;
    Mat aug(m, c.ncols + m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < c.ncols; ++j) aug.at(i, j) = c.at(i, j);
        aug.at(i, c.ncols + i) = 1;
    }
    detail::rref_dispatch(f, aug);
    std::vector<Vec> out;
    for (std::size_t i = 0; i < aug.nrows; ++i) {
        bool zero = true;
        for (std::size_t j = 0; j < c.ncols; ++j) {
            if (aug.at(i, j) != 0) {
                zero = false;
                break;
            }
        }
        if (!zero) continue;
        Vec z(m);
        for (std::size_t j = 0; j < m; ++j) z[j] = aug.at(i, c.ncols + j);
        out.push_back(std::move(z));
    }
    // The tail block of an RREF is itself RREF.
    Mat res = Mat::from_rows(out);
    assert(is_canonical_rref(res));
    return res;
}

Subspace intersect(const Field& f, const Subspace& a, const Subspace& b) {
    if (a.ambient != b.ambient) throw DimensionMismatch("intersect: ambient mismatch");
    if (a.dim() == 0 || b.dim() == 0) return zero_subspace(a.ambient);
    Mat stacked(a.dim() + b.dim(), a.ambient);
    std::copy(a.basis.a.begin(), a.basis.a.end(), stacked.a.begin());
    std::copy(b.basis.a.begin(), b.basis.a.end(), stacked.a.begin() + a.basis.a.size());
    const Mat null = left_nullspace(f, stacked);
    // x A (+) y B = 0, so x A = y B lies in both spans.
    Mat vecs(null.nrows, a.ambient);
    for (std::size_t i = 0; i < null.nrows; ++i) {
        for (std::size_t k = 0; k < a.dim(); ++k) {
            const Elem c = null.at(i, k);
            if (c == 0) continue;
            for (std::size_t j = 0; j < a.ambient; ++j) {
                vecs.at(i, j) = f.add(vecs.at(i, j), f.mul(c, a.basis.at(k, j)));
            }
        }
    }
    return canonicalize(f, vecs, a.ambient);
}

bool contains(const Field& f, const Subspace& a, std::span<const Elem> v) {
    if (v.size() != a.ambient) throw DimensionMismatch("contains: ambient mismatch");
    if (f.order() == 2 && a.ambient <= 64) {
        return detail::PackedBasis::from(a).contains(detail::pack_row(v));
    }
    Vec w(v.begin(), v.end());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const std::size_t p = detail::pivot_col(a.basis, i);
        const Elem c = w[p];
        if (c == 0) continue;
        for (std::size_t j = p; j < a.ambient; ++j) {
            w[j] = f.add(w[j], f.mul(c, a.basis.at(i, j)));
        }
    }
    return std::all_of(w.begin(), w.end(), [](Elem e) { return e == 0; });
}

bool contains(const Field& f, const Subspace& a, const Subspace& b) {
    if (a.ambient != b.ambient) throw DimensionMismatch("contains: ambient mismatch");
    if (f.order() == 2 && a.ambient <= 64) {
        const auto packed = detail::PackedBasis::from(a);
        for (std::size_t i = 0; i < b.dim(); ++i) {
            if (!packed.contains(detail::pack_row(b.basis.row(i)))) return false;
        }
        return true;
    }
    for (std::size_t i = 0; i < b.dim(); ++i) {
        if (!contains(f, a, b.basis.row(i))) return false;
    }
    return true;
}

Mat transpose(const Mat& m) {
    Mat t(m.ncols, m.nrows);
    for (std::size_t i = 0; i < m.nrows; ++i) {
        for (std::size_t j = 0; j < m.ncols; ++j) t.at(j, i) = m.at(i, j);
    }
    return t;
}

Mat mat_mul(const Field& f, const Mat& x, const Mat& y) {
    if (x.ncols != y.nrows) throw DimensionMismatch("mat_mul: inner dimensions differ");
    Mat out(x.nrows, y.ncols);
    for (std::size_t i = 0; i < x.nrows; ++i) {
        for (std::size_t k = 0; k < x.ncols; ++k) {
            const Elem c = x.at(i, k);
            if (c == 0) continue;
            for (std::size_t j = 0; j < y.ncols; ++j) {
                out.at(i, j) = f.add(out.at(i, j), f.mul(c, y.at(k, j)));
            }
        }
    }
    return out;
}

Mat gram(const Field& f, const Subspace& p, const Mat& form) {
    if (form.nrows != form.ncols || form.nrows != p.ambient) {
        throw DimensionMismatch("gram: form does not match ambient dimension");
    }
    return mat_mul(f, mat_mul(f, p.basis, form), transpose(p.basis));
}

Subspace perp(const Field& f, const Subspace& p, const Mat& form) {
    if (form.nrows != form.ncols || form.nrows != p.ambient) {
        throw DimensionMismatch("perp: form does not match ambient dimension");
    }
    if (p.dim() == 0) return full_space(p.ambient);
    const Mat n = mat_mul(f, form, transpose(p.basis));  // ambient x dim
    Mat z = left_nullspace(f, n);
    Subspace out;
    out.ambient = p.ambient;
    out.basis = std::move(z);
    if (out.dim() != p.ambient - p.dim()) {
        throw Error("perp: dimension identity violated (degenerate form?)");
    }
    return out;
}

unsigned rank(const Field& f, Mat m) {
    detail::rref_dispatch(f, m);
    return static_cast<unsigned>(m.nrows);
}

bool is_canonical_rref(const Mat& m) {
    std::size_t last_pivot = 0;
    bool first = true;
    for (std::size_t i = 0; i < m.nrows; ++i) {
        const std::size_t p = detail::pivot_col(m, i);
        if (p == m.ncols) return false;  // zero row
        if (!first && p <= last_pivot) return false;
        if (m.at(i, p) != 1) return false;
        for (std::size_t k = 0; k < m.nrows; ++k) {
            if (k != i && m.at(k, p) != 0) return false;
        }
        last_pivot = p;
        first = false;
    }
    return true;
}

bool mat_invertible(const Field& f, const Mat& m) {
    if (m.nrows != m.ncols) return false;
    return rank(f, m) == m.nrows;
}

}  // namespace mra
