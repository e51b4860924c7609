#include "mra/psgeom.hpp"

#include <string>

namespace mra {

SpaceSpec::SpaceSpec(const Field& field, unsigned nu, unsigned delta)
    : field_(field), nu_(nu), delta_(delta) {
    if (delta != 1 && delta != 2) {
        throw ConstraintViolation("delta must be 1 or 2, got " + std::to_string(delta));
    }
    if (nu < 1) throw ConstraintViolation("nu must be >= 1");
    const std::size_t d = dim();
    form_ = Mat(d, d);
    for (unsigned i = 0; i < nu; ++i) {
        form_.at(i, nu + i) = 1;
        form_.at(nu + i, i) = 1;
    }
    if (delta == 1) {
        form_.at(2 * nu, 2 * nu) = 1;
    } else {
        form_.at(2 * nu, 2 * nu + 1) = 1;
        form_.at(2 * nu + 1, 2 * nu) = 1;
        form_.at(2 * nu + 1, 2 * nu + 1) = 1;
    }
}

SubspaceType classify(const SpaceSpec& space, const Subspace& p) {
    if (p.ambient != space.dim()) throw DimensionMismatch("classify: ambient mismatch");
    const Field& f = space.field();
    const Mat g = gram(f, p, space.form());
    bool alternate = true;
    for (std::size_t i = 0; i < g.nrows; ++i) {
        if (g.at(i, i) != 0) {
            alternate = false;
            break;
        }
    }
    const unsigned rk = rank(f, g);
    SubspaceType t;
    t.m = static_cast<unsigned>(p.dim());
    t.t = rk;
    if (alternate) {
        t.s = rk / 2;
    } else if (rk % 2 == 1) {
        t.s = (rk - 1) / 2;
    } else {
        t.s = (rk - 2) / 2;
    }
    const Vec sp = space.special_vector();
    t.eps = contains(f, p, sp) ? 1 : 0;
    return t;
}

bool is_group_element(const SpaceSpec& space, const Mat& t) {
    if (t.nrows != space.dim() || t.ncols != space.dim()) {
        throw DimensionMismatch("is_group_element: matrix size mismatch");
    }
    const Field& f = space.field();
    if (!mat_invertible(f, t)) return false;
    return mat_mul(f, mat_mul(f, t, space.form()), transpose(t)) == space.form();
}

GroupElement random_stabilizing_element(const SpaceSpec& space, Xoshiro256StarStar& rng) {
    const Field& f = space.field();
    const unsigned nu = space.nu();
    const std::size_t d = space.dim();
    const unsigned q = f.order();
    Mat m = Mat::identity(d);
    const unsigned steps = 10 + static_cast<unsigned>(rng.below(41));
    for (unsigned step = 0; step < steps; ++step) {
        if (rng.below(2) == 0) {
            // Transvection x -> x + lambda (x K tv) v on the symplectic block.
            Vec v(2 * nu, 0);
            bool nonzero = false;
            while (!nonzero) {
                for (unsigned i = 0; i < 2 * nu; ++i) {
                    v[i] = static_cast<Elem>(rng.below(q));
                    if (v[i] != 0) nonzero = true;
                }
            }
            const Elem lambda = static_cast<Elem>(1 + rng.below(q - 1));
            // u = K tv on the first 2nu coordinates: u_i = v_{i +- nu}.
            Vec u(2 * nu, 0);
            for (unsigned i = 0; i < nu; ++i) {
                u[i] = v[nu + i];
                u[nu + i] = v[i];
            }
            // Right-multiply: M <- M (I + lambda u (x) v) = M + lambda (M u) (x) v.
            Vec mu(d, 0);
            for (std::size_t i = 0; i < d; ++i) {
                Elem acc = 0;
                for (unsigned k = 0; k < 2 * nu; ++k) {
                    if (u[k] != 0) acc = f.add(acc, f.mul(m.at(i, k), u[k]));
                }
                mu[i] = acc;
            }
            for (std::size_t i = 0; i < d; ++i) {
                if (mu[i] == 0) continue;
                const Elem c = f.mul(lambda, mu[i]);
                for (unsigned j = 0; j < 2 * nu; ++j) {
                    if (v[j] != 0) m.at(i, j) = f.add(m.at(i, j), f.mul(c, v[j]));
                }
            }
        } else {
            // Hyperbolic pair swap: columns i <-> nu+i.
            const unsigned i = static_cast<unsigned>(rng.below(nu));
            for (std::size_t row = 0; row < d; ++row) {
                std::swap(m.at(row, i), m.at(row, nu + i));
            }
        }
    }
    return GroupElement{std::move(m)};
}

Subspace transform(const Field& f, const Subspace& p, const Mat& t) {
    return canonicalize(f, mat_mul(f, p.basis, t), p.ambient);
}

}  // namespace mra
