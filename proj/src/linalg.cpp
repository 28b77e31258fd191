#include "sfmax/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sfmax/config.hpp"

namespace sfmax::linalg {

namespace {

void require_square(const ComplexMatrix& a, const char* who) {
    if (a.rows() != a.cols()) {
        std::ostringstream os;
        os << who << ": matrix must be square, got " << a.rows() << "x"
           << a.cols();
        throw std::invalid_argument(os.str());
    }
}

// Forward substitution: overwrite each column b_j of `rhs` with L^{-1} b_j.
void forward_solve_inplace(const ComplexMatrix& l, ComplexMatrix& rhs) {
    const long n = l.rows();
    for (long j = 0; j < rhs.cols(); ++j) {
        for (long i = 0; i < n; ++i) {
            cplx acc = rhs(i, j);
            for (long k = 0; k < i; ++k) acc -= l(i, k) * rhs(k, j);
            rhs(i, j) = acc / l(i, i);
        }
    }
}

ComplexMatrix conj_transpose(const ComplexMatrix& a) {
    ComplexMatrix r(a.cols(), a.rows());
    for (long i = 0; i < a.rows(); ++i) {
        for (long j = 0; j < a.cols(); ++j) r(j, i) = std::conj(a(i, j));
    }
    return r;
}

}  // namespace

ComplexMatrix cholesky_hermitian(const ComplexMatrix& a) {
    require_square(a, "cholesky_hermitian");
    const long n = a.rows();
    double amax = 0.0;
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) amax = std::max(amax, std::abs(a(i, j)));
    }
    const double pivot_tol =
        static_cast<double>(n) * std::numeric_limits<double>::epsilon() * amax;
    ComplexMatrix l(n, n);
    for (long j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (long k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > pivot_tol)) {
            std::ostringstream os;
            os << "cholesky_hermitian: pivot " << j << " is " << d
               << "; matrix is not positive definite";
            throw numerical_instability_error(os.str());
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (long i = j + 1; i < n; ++i) {
            cplx acc = a(i, j);
            for (long k = 0; k < j; ++k) acc -= l(i, k) * std::conj(l(j, k));
            l(i, j) = acc / ljj;
        }
    }
    return l;
}

std::vector<double> eigvals_hermitian(ComplexMatrix a) {
    require_square(a, "eigvals_hermitian");
    const long n = a.rows();
    if (n == 0) return {};
    if (n == 1) return {a(0, 0).real()};

    double frob2 = 0.0;
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) frob2 += std::norm(a(i, j));
    }
    const double off_target2 = frob2 * 1e-28;  // (1e-14 ||A||_F)^2

    constexpr int kMaxSweeps = 50;
    for (int sweep = 0;; ++sweep) {
        double off2 = 0.0;
        for (long i = 0; i < n; ++i) {
            for (long j = i + 1; j < n; ++j) off2 += 2.0 * std::norm(a(i, j));
        }
        if (off2 <= off_target2) {
            std::vector<double> ev(static_cast<size_t>(n));
            for (long i = 0; i < n; ++i) ev[static_cast<size_t>(i)] = a(i, i).real();
            std::sort(ev.begin(), ev.end());
            return ev;
        }
        if (sweep >= kMaxSweeps) break;
        for (long p = 0; p < n - 1; ++p) {
            for (long q = p + 1; q < n; ++q) {
                const double r = std::abs(a(p, q));
                if (r == 0.0) continue;
                // Phase out a_pq, then a real Jacobi rotation in the (p,q)
                // plane: combined unitary U has columns
                //   U(p,p)=c, U(p,q)=s, U(q,p)=-s*ph_c, U(q,q)=c*ph_c,
                // with ph_c = conj(a_pq)/|a_pq|.
                const cplx ph = a(p, q) / r;       // e^{i theta}
                const cplx ph_c = std::conj(ph);   // e^{-i theta}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * r);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // A <- U^H A U: columns first, then rows.
                for (long k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * ph_c * akq;
                    a(k, q) = s * akp + c * ph_c * akq;
                }
                for (long k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * ph * aqk;
                    a(q, k) = s * apk + c * ph * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }
    throw numerical_instability_error(
        "eigvals_hermitian: Jacobi sweeps did not reach the off-diagonal "
        "target within 50 sweeps");
}

double max_generalized_eig(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_square(a, "max_generalized_eig");
    require_square(b, "max_generalized_eig");
    if (a.rows() != b.rows()) {
        throw std::invalid_argument(
            "max_generalized_eig: dimension mismatch between the two matrices");
    }
    const long n = a.rows();
    // Symmetrize the numerator before whitening; callers hand us matrices that
    // are Hermitian only up to roundoff.
    ComplexMatrix as(n, n);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            as(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
        }
    }
    ComplexMatrix l = cholesky_hermitian(b);
    forward_solve_inplace(l, as);            // as = L^{-1} A
    ComplexMatrix w = conj_transpose(as);    // w = A^H L^{-H}
    forward_solve_inplace(l, w);             // w = L^{-1} A^H L^{-H} = (L^{-1} A L^{-H})^H
    for (long i = 0; i < n; ++i) {
        for (long j = i; j < n; ++j) {
            const cplx v = 0.5 * (w(i, j) + std::conj(w(j, i)));
            w(i, j) = v;
            w(j, i) = std::conj(v);
        }
    }
    std::vector<double> ev = eigvals_hermitian(std::move(w));
    return ev.back();
}

LogScaled logdet_lu(const RealMatrix& a) {
    const long n = a.size();
    if (n == 0) return LogScaled::one();
    std::vector<double> m(static_cast<size_t>(n * n));
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) m[static_cast<size_t>(i * n + j)] = a(i, j);
    }
    int sign = 1;
    double log_det = 0.0;
    for (long k = 0; k < n; ++k) {
        long piv = k;
        double pmax = std::fabs(m[static_cast<size_t>(k * n + k)]);
        for (long i = k + 1; i < n; ++i) {
            const double v = std::fabs(m[static_cast<size_t>(i * n + k)]);
            if (v > pmax) {
                pmax = v;
                piv = i;
            }
        }
        if (pmax == 0.0) return LogScaled::zero();
        if (piv != k) {
            for (long j = 0; j < n; ++j) {
                std::swap(m[static_cast<size_t>(k * n + j)],
                          m[static_cast<size_t>(piv * n + j)]);
            }
            sign = -sign;
        }
        const double pivot = m[static_cast<size_t>(k * n + k)];
        if (pivot < 0.0) sign = -sign;
        log_det += std::log(std::fabs(pivot));
        for (long i = k + 1; i < n; ++i) {
            const double f = m[static_cast<size_t>(i * n + k)] / pivot;
            if (f == 0.0) continue;
            for (long j = k + 1; j < n; ++j) {
                m[static_cast<size_t>(i * n + j)] -= f * m[static_cast<size_t>(k * n + j)];
            }
        }
    }
    return {sign, log_det};
}

namespace {

struct LuPass {
    int sign = 0;          // 0 means an exact zero pivot was hit
    double log_det = 0.0;  // includes the column scales
    double worst_digits = 0.0;
};

// Loss report when the two elimination orders disagree on the determinant's
// sign: the value is pure noise, so flag it well past any abort threshold.
constexpr double kSignFlipLossDigits = 99.0;

// Column-scale (optionally the transpose of) `a` into doubles and run one
// partially pivoted elimination. col_peak tracks the largest magnitude each
// column ever held; a pivot far below its column's peak signals digits lost
// to cancellation during the updates that produced it.
LuPass lu_pass(const LogScaledMatrix& a, bool transpose) {
    const long n = a.size();
    auto at = [&](long i, long j) -> const LogScaled& {
        return transpose ? a(j, i) : a(i, j);
    };
    std::vector<double> m(static_cast<size_t>(n * n), 0.0);
    double log_scale_total = 0.0;
    for (long j = 0; j < n; ++j) {
        double smax = -std::numeric_limits<double>::infinity();
        for (long i = 0; i < n; ++i) {
            if (!at(i, j).is_zero()) smax = std::max(smax, at(i, j).log_mag);
        }
        if (smax == -std::numeric_limits<double>::infinity()) {
            return {};  // all-zero column
        }
        log_scale_total += smax;
        for (long i = 0; i < n; ++i) {
            const LogScaled& e = at(i, j);
            if (!e.is_zero()) {
                m[static_cast<size_t>(i * n + j)] =
                    e.sign * std::exp(e.log_mag - smax);
            }
        }
    }
    std::vector<double> col_peak(static_cast<size_t>(n), 0.0);
    for (long j = 0; j < n; ++j) {
        for (long i = 0; i < n; ++i) {
            col_peak[static_cast<size_t>(j)] =
                std::max(col_peak[static_cast<size_t>(j)],
                         std::fabs(m[static_cast<size_t>(i * n + j)]));
        }
    }
    LuPass out;
    out.sign = 1;
    for (long k = 0; k < n; ++k) {
        long piv = k;
        double pmax = std::fabs(m[static_cast<size_t>(k * n + k)]);
        for (long i = k + 1; i < n; ++i) {
            const double v = std::fabs(m[static_cast<size_t>(i * n + k)]);
            if (v > pmax) {
                pmax = v;
                piv = i;
            }
        }
        if (pmax == 0.0) return {};
        if (piv != k) {
            for (long j = 0; j < n; ++j) {
                std::swap(m[static_cast<size_t>(k * n + j)],
                          m[static_cast<size_t>(piv * n + j)]);
            }
            out.sign = -out.sign;
        }
        const double pivot = m[static_cast<size_t>(k * n + k)];
        if (pivot < 0.0) out.sign = -out.sign;
        out.log_det += std::log(std::fabs(pivot));
        out.worst_digits = std::max(
            out.worst_digits, std::log10(col_peak[static_cast<size_t>(k)] / pmax));
        for (long i = k + 1; i < n; ++i) {
            const double f = m[static_cast<size_t>(i * n + k)] / pivot;
            if (f == 0.0) continue;
            for (long j = k + 1; j < n; ++j) {
                double& e = m[static_cast<size_t>(i * n + j)];
                e -= f * m[static_cast<size_t>(k * n + j)];
                col_peak[static_cast<size_t>(j)] =
                    std::max(col_peak[static_cast<size_t>(j)], std::fabs(e));
            }
        }
    }
    out.log_det += log_scale_total;
    return out;
}

}  // namespace

LogScaled logdet_lu(const LogScaledMatrix& a, double* cancellation_digits) {
    const long n = a.size();
    if (cancellation_digits) *cancellation_digits = 0.0;
    if (n == 0) return LogScaled::one();

    // Two independent eliminations, over A and over A^T. Their determinants
    // are equal in exact arithmetic, so the observed disagreement measures
    // the rounding noise of the whole computation — including cancellation
    // the per-pivot monitor cannot see, when a determinant sits on its noise
    // floor with individually healthy-looking pivots.
    const LuPass fwd = lu_pass(a, false);
    if (fwd.sign == 0) {
        if (cancellation_digits) {
            *cancellation_digits = std::numeric_limits<double>::infinity();
        }
        return LogScaled::zero();
    }
    const LuPass bwd = lu_pass(a, true);

    if (cancellation_digits) {
        double disagreement;
        if (bwd.sign != fwd.sign) {
            disagreement = kSignFlipLossDigits;
        } else {
            // |delta ln det| approximates the relative difference; digits
            // lost = 16 + log10 of it (two answers agreeing to k digits
            // carry roughly k digits). The transposed pass's own pivot
            // monitor is deliberately ignored: transposing a column-graded
            // matrix makes that elimination look badly scaled even when its
            // result is fine, and any real inaccuracy it has surfaces here
            // as disagreement anyway.
            const double rel = std::fabs(fwd.log_det - bwd.log_det);
            disagreement =
                rel <= 1e-16 ? 0.0 : std::max(0.0, 16.0 + std::log10(rel));
        }
        *cancellation_digits = std::max(fwd.worst_digits, disagreement);
    }
    return {fwd.sign, fwd.log_det};
}

}  // namespace sfmax::linalg
