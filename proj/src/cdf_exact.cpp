#include "sfmax/cdf_exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sfmax/linalg.hpp"
#include "sfmax/special_functions.hpp"

namespace sfmax::cdf {

namespace {

long double lf(long k) { return log_factorial_l(k); }

// Series convergence policy: stop once terms have started decaying and three
// consecutive terms fall 18 decades below the running sum; a series that has
// not converged by the cap is reported as numerically unstable.
constexpr long kMaxSeriesTerms = 500000;
constexpr double kSeriesRelStopLog = -41.446531673892822312;  // ln(1e-18)

// cdf_alpha0_spiked uses the direct two-term closed form while its predicted
// cancellation stays under this many digits (long-double headroom is ~18).
constexpr double kAlpha0DirectMaxLossDigits = 3.0;

// Minimum pairwise gap of the transformed eigenvalues accepted by the joint
// density API; the divided differences divide by these gaps.
constexpr double kMinTransformedGap = 1e-8;

// Deep-saturation window of the closed-form cdf routes. Past this y the
// near-singular determinant structure limits attainable accuracy to roughly
// kSaturationSlack, so an overshoot of at most that size is treated as
// saturation at 1 rather than a broken evaluation.
constexpr double kSaturationY = 0.999;
constexpr double kSaturationSlack = 3e-6;

// y = x/(1+x), arranged so x >> 1 keeps full precision in 1 - y.
double transform_to_y(double x) {
    if (x > 1.0) return 1.0 / (1.0 + 1.0 / x);
    return x / (1.0 + x);
}

void check_x(double x, const char* op) {
    if (!std::isfinite(x) || x < 0.0) {
        std::ostringstream os;
        os << op << ": x = " << x << " must be a finite value >= 0";
        throw std::invalid_argument(os.str());
    }
}

void check_index(long v, long lo, long hi, const char* op, const char* name) {
    if (v < lo || v > hi) {
        std::ostringstream os;
        os << op << ": index " << name << " = " << v << " outside [" << lo
           << ", " << hi << "]";
        throw std::invalid_argument(os.str());
    }
}

// Internal determinant-entry builders. The public wrappers validate indices
// and y; these assume a valid cfg and use the zero convention for negative
// polynomial degrees so determinant assembly can iterate rectangularly.

LogScaled psi_build(long i, long j, double y, const SpikedFConfig& cfg) {
    const long deg = cfg.n + i - j;
    if (deg < 0) return LogScaled::zero();
    LogScaled v = sf::pochhammer(static_cast<double>(cfg.m + i - 1), j - 2);
    v *= sf::jacobi_p_log(deg, j - 2, cfg.beta() + j - 2, 2.0 / y - 1.0);
    return v;
}

LogScaled phi_build(long i, double y, const SpikedFConfig& cfg) {
    const long m = cfg.m, n = cfg.n;
    const long alpha = cfg.alpha(), beta = cfg.beta();
    const long double lcy = logl(static_cast<long double>(cfg.c_eta())) +
                            logl(static_cast<long double>(y));
    SignedLogSum acc;  // every term positive
    for (long k = 0; k < beta; ++k) {
        long double lm = lf(m + alpha - k - 1) + lf(n + k + i - 2) - lf(k) -
                         lf(m + i - k - 2) - k * lcy;
        acc.add({1, static_cast<double>(lm)});
    }
    return acc.result();
}

LogScaled omega_build(long i, double y, const SpikedFConfig& cfg,
                      double* cancel_digits = nullptr) {
    const long m = cfg.m, n = cfg.n, alpha = cfg.alpha();
    const double cy = cfg.c_eta() * y;
    const double z = -cy / (1.0 - cy);
    const long kmax = n + i - 2;
    SignedLogSum acc;
    for (long k = 0; k <= kmax; ++k) {
        LogScaled t = sf::omega_2f1_log(n, alpha, k, z);
        t *= LogScaled{k % 2 == 0 ? 1 : -1,
                       static_cast<double>(lf(m + i + k - 2) - lf(kmax - k) -
                                           lf(k) - lf(k + 1))};
        acc.add(t);
    }
    // the k-sum alternates, so it is the one entry-level cancellation source
    // inside the determinant route
    if (cancel_digits != nullptr) *cancel_digits = acc.cancellation_digits();
    LogScaled r = acc.result();
    r.log_mag += static_cast<double>(lf(n + i - 2) - lf(m + i - 2));
    return r;
}

// Determinantal route for the spiked cdf: G(y) as the signed sum of the two
// (alpha+1)-dimensional determinant terms. loss_digits receives the worst of
// the term-combination and LU elimination monitors.
LogScaled det_route_g(double y, const SpikedFConfig& cfg, double* loss_digits) {
    const long m = cfg.m, n = cfg.n, alpha = cfg.alpha();
    const long dim = alpha + 1;
    const long double c = static_cast<long double>(cfg.c_eta());
    const long double ly = logl(static_cast<long double>(y));
    const double cy = cfg.c_eta() * y;

    linalg::LogScaledMatrix wa(dim), wb(dim);
    double entry_cd = 0.0;
    for (long i = 1; i <= dim; ++i) {
        double ocd = 0.0;
        wa(i - 1, 0) = omega_build(i, y, cfg, &ocd);
        entry_cd = std::max(entry_cd, ocd);
        LogScaled ph = phi_build(i, y, cfg);
        if (i % 2 == 0) ph = -ph;  // column carries (-1)^{i-1}
        wb(i - 1, 0) = ph;
        for (long j = 2; j <= dim; ++j) {
            wa(i - 1, j - 1) = psi_build(i, j, y, cfg);
            wb(i - 1, j - 1) = wa(i - 1, j - 1);
        }
    }
    double lua = 0.0, lub = 0.0;
    LogScaled t1 = linalg::logdet_lu(wa, &lua);
    LogScaled t2 = linalg::logdet_lu(wb, &lub);
    t1.log_mag += static_cast<double>(
        lf(n + alpha) + (n * (alpha + m) - m + 1) * ly - (m - 1) * logl(c) -
        (n + alpha + 1) * log1pl(-static_cast<long double>(cy)));
    t2.log_mag += static_cast<double>(n * (m + alpha - 1) * ly - n * logl(c));
    if (n % 2 != 0) t2 = -t2;

    SignedLogSum sum;
    sum.add(t1);
    sum.add(t2);
    *loss_digits = std::max({sum.cancellation_digits(), lua, lub, entry_cd});
    return sum.result();
}

// Series route: the special first column of the determinant is expanded into
// an absolutely convergent power series in c*y. The Psi cofactors do not
// depend on the series index, so they are computed once up front; each term
// then costs alpha+1 closed-form moments.
LogScaled series_cdf(double y, const SpikedFConfig& cfg,
                     double* loss_digits = nullptr) {
    const long m = cfg.m, n = cfg.n, p = cfg.p;
    const long alpha = cfg.alpha(), beta = cfg.beta();
    const long double lc = logl(static_cast<long double>(cfg.c_eta()));
    const long double ly = logl(static_cast<long double>(y));

    std::vector<LogScaled> cof(static_cast<size_t>(alpha) + 1);
    double worst_cofactor_loss = 0.0;
    if (alpha == 0) {
        cof[0] = LogScaled::one();
    } else {
        for (long r = 0; r <= alpha; ++r) {
            linalg::LogScaledMatrix minor(alpha);
            long rr = 0;
            for (long i = 1; i <= alpha + 1; ++i) {
                if (i == r + 1) continue;
                for (long j = 2; j <= alpha + 1; ++j) {
                    minor(rr, j - 2) = psi_build(i, j, y, cfg);
                }
                ++rr;
            }
            double loss = 0.0;
            cof[static_cast<size_t>(r)] = linalg::logdet_lu(minor, &loss);
            if (!cof[static_cast<size_t>(r)].is_zero()) {
                worst_cofactor_loss = std::max(worst_cofactor_loss, loss);
            }
            if (r % 2 != 0) {
                cof[static_cast<size_t>(r)] = -cof[static_cast<size_t>(r)];
            }
        }
        if (worst_cofactor_loss > detail::kCancellationAbortDigits) {
            throw numerical_instability_error(
                "cdf series route: cofactor determinants lost more than 12 "
                "digits to cancellation; this configuration needs extended "
                "precision");
        }
    }

    SignedLogSum acc;
    LogScaled running = LogScaled::zero();
    double prev_mag = -std::numeric_limits<double>::infinity();
    bool decaying = false;
    int quiet = 0;
    long u = 0;
    for (; u < kMaxSeriesTerms; ++u) {
        const long q = m - 1 + u;
        SignedLogSum dot;
        for (long i = 0; i <= alpha; ++i) {
            const LogScaled& cf = cof[static_cast<size_t>(i)];
            if (cf.is_zero()) continue;
            LogScaled mom = detail::jacobi_moment(q, n + i - 1, beta);
            if (mom.is_zero()) continue;
            dot.add(mom * cf);
        }
        LogScaled term = dot.result();
        bool small = true;
        if (!term.is_zero()) {
            term.log_mag += static_cast<double>(
                lf(n + alpha + m - 1 + u) - lf(m - 1 + u) + u * lc +
                (m * n + u) * ly);
            acc.add(term);
            running += term;
            if (term.log_mag < prev_mag) decaying = true;
            prev_mag = term.log_mag;
            small = !running.is_zero() &&
                    term.log_mag - running.log_mag <= kSeriesRelStopLog;
        }
        if (decaying && u > alpha && small) {
            if (++quiet >= 3) break;
        } else {
            quiet = 0;
        }
    }
    if (u >= kMaxSeriesTerms) {
        throw numerical_instability_error(
            "cdf series route failed to converge within the term cap");
    }
    if (acc.cancellation_digits() > detail::kCancellationAbortDigits) {
        throw numerical_instability_error(
            "cdf series route lost more than 12 digits to cancellation");
    }
    if (loss_digits != nullptr) {
        *loss_digits = std::max(acc.cancellation_digits(), worst_cofactor_loss);
    }

    LogScaled f = acc.result();
    f *= detail::spiked_cdf_constant(m, n, p);
    f.log_mag += static_cast<double>(
        alpha * n * ly - n * log1pl(static_cast<long double>(cfg.eta)));
    return f;
}

// Direct two-term closed form at alpha = 0 (p = m), raw eigenvalue scale.
LogScaled alpha0_closed_form(double x, long m, long n, double eta,
                             double* loss_digits) {
    const long beta = m - n;
    const long double lx = logl(static_cast<long double>(x));
    const long double l1px = log1pl(static_cast<long double>(x));
    const long double leta = logl(static_cast<long double>(eta));
    const long double l1pe = log1pl(static_cast<long double>(eta));
    const long double lc = leta - l1pe;  // ln c_eta
    const double z = -eta * x / (1.0 + eta + x);

    SignedLogSum s1;
    for (long k = 0; k < n; ++k) {
        LogScaled t = sf::omega_2f1_log(n, 0, k, z);
        t *= LogScaled{k % 2 == 0 ? 1 : -1,
                       static_cast<double>(lf(m + k - 1) - lf(k) - lf(k + 1) -
                                           lf(n - k - 1))};
        s1.add(t);
    }
    LogScaled a = s1.result();
    a.log_mag += static_cast<double>(
        lf(n) - lf(m - 1) + m * l1pe - (m - 1) * leta +
        (m * (n - 1) + 1) * lx - (m * n - m - n) * l1px -
        (n + 1) * logl(1.0L + static_cast<long double>(eta) +
                       static_cast<long double>(x)));

    SignedLogSum s2;  // positive terms
    for (long k = 0; k < beta; ++k) {
        long double lm =
            lf(n + k - 1) + (n * (m - 1) - k) * (lx - l1px) - lf(k) - k * lc;
        s2.add({1, static_cast<double>(lm)});
    }
    LogScaled b = s2.result();
    b.log_mag += static_cast<double>(-lf(n - 1) - n * leta);
    if (n % 2 != 0) b = -b;

    SignedLogSum tot;
    tot.add(a);
    tot.add(b);
    *loss_digits = std::max(tot.cancellation_digits(), s1.cancellation_digits());
    return tot.result();
}

void validate_lambdas(const std::vector<double>& lambdas,
                      const SpikedFConfig& cfg, const char* op) {
    if (static_cast<long>(lambdas.size()) != cfg.n) {
        std::ostringstream os;
        os << op << ": expected exactly n = " << cfg.n << " eigenvalues, got "
           << lambdas.size();
        throw std::invalid_argument(os.str());
    }
    for (double v : lambdas) {
        if (!std::isfinite(v) || v <= 0.0) {
            std::ostringstream os;
            os << op << ": eigenvalue " << v << " is not a finite positive value";
            throw std::invalid_argument(os.str());
        }
    }
    for (size_t k = 1; k < lambdas.size(); ++k) {
        if (!(lambdas[k] > lambdas[k - 1])) {
            std::ostringstream os;
            os << op << ": eigenvalues must be strictly ascending";
            throw std::invalid_argument(os.str());
        }
        const double gap =
            transform_to_y(lambdas[k]) - transform_to_y(lambdas[k - 1]);
        if (gap < kMinTransformedGap) {
            std::ostringstream os;
            os << op << ": transformed eigenvalue gap " << gap
               << " below the 1e-8 minimum";
            throw std::invalid_argument(os.str());
        }
    }
}

// Divided-difference (direct) evaluation of the spike factor g(x_1..x_n).
LogScaled spike_direct_factor(const std::vector<double>& xs,
                              const SpikedFConfig& cfg, double* loss_digits) {
    const long m = cfg.m, n = cfg.n, p = cfg.p;
    const long alpha = cfg.alpha(), beta = cfg.beta();
    const long double c = static_cast<long double>(cfg.c_eta());
    const long double lc = logl(c);
    SignedLogSum acc;
    for (long k = 0; k < n; ++k) {
        const long double xk = static_cast<long double>(xs[static_cast<size_t>(k)]);
        const long double lxk = logl(xk);
        long double lpref = 0.0L;
        for (long l = 0; l < n; ++l) {
            if (l == k) continue;
            lpref -= logl(fabsl(xk - static_cast<long double>(
                                         xs[static_cast<size_t>(l)])));
        }
        const int spref = (n - 1 - k) % 2 == 0 ? 1 : -1;
        long double la = lf(n + alpha) - (m - 1) * lc - beta * lxk -
                         (n + alpha + 1) * log1pl(-c * xk);
        acc.add({spref, static_cast<double>(lpref + la)});
        for (long j = 0; j < beta; ++j) {
            long double lb = lf(p - j - 1) - lf(beta - j - 1) - (n + j) * lc -
                             (j + 1) * lxk;
            acc.add({-spref, static_cast<double>(lpref + lb)});
        }
    }
    *loss_digits = acc.cancellation_digits();
    return acc.result();
}

// ln of the spike-free part of the joint density at lambdas:
//   beta * sum ln(lambda) - (p+n) * sum ln(1+lambda) + 2 * sum_{i<j} ln(gap)
long double density_base_log(const std::vector<double>& lambdas,
                             const SpikedFConfig& cfg) {
    long double lb = 0.0L;
    for (double v : lambdas) {
        lb += cfg.beta() * logl(static_cast<long double>(v)) -
              (cfg.p + cfg.n) * log1pl(static_cast<long double>(v));
    }
    for (size_t i = 0; i < lambdas.size(); ++i) {
        for (size_t j = i + 1; j < lambdas.size(); ++j) {
            lb += 2.0L * logl(static_cast<long double>(lambdas[j]) -
                              static_cast<long double>(lambdas[i]));
        }
    }
    return lb;
}

}  // namespace

LogScaled psi_entry(long i, long j, double y, const SpikedFConfig& cfg) {
    cfg.validate();
    check_index(i, 1, cfg.alpha() + 1, "psi_entry", "i");
    check_index(j, 2, cfg.alpha() + 1, "psi_entry", "j");
    if (cfg.n + i - j < 0) {
        std::ostringstream os;
        os << "psi_entry: polynomial degree n + i - j = " << cfg.n + i - j
           << " is negative";
        throw std::invalid_argument(os.str());
    }
    if (!std::isfinite(y) || !(y > 0.0) || y > 1.0) {
        std::ostringstream os;
        os << "psi_entry: y = " << y << " outside (0, 1]";
        throw std::invalid_argument(os.str());
    }
    return psi_build(i, j, y, cfg);
}

LogScaled phi_entry(long i, double y, const SpikedFConfig& cfg) {
    cfg.validate_spiked();
    check_index(i, 1, cfg.alpha() + 1, "phi_entry", "i");
    if (!std::isfinite(y) || !(y > 0.0) || y > 1.0) {
        std::ostringstream os;
        os << "phi_entry: y = " << y << " outside (0, 1]";
        throw std::invalid_argument(os.str());
    }
    return phi_build(i, y, cfg);
}

LogScaled omega_entry_log(long i, double y, const SpikedFConfig& cfg) {
    cfg.validate_spiked();
    check_index(i, 1, cfg.alpha() + 1, "omega_entry", "i");
    if (!std::isfinite(y) || y < 0.0 || y >= 1.0) {
        std::ostringstream os;
        os << "omega_entry: y = " << y << " outside [0, 1)";
        throw std::invalid_argument(os.str());
    }
    return omega_build(i, y, cfg);
}

double omega_entry(long i, double y, const SpikedFConfig& cfg) {
    return omega_entry_log(i, y, cfg).value();
}

Probability cdf_max_spiked(double x, const SpikedFConfig& cfg) {
    cfg.validate_spiked();
    check_x(x, "cdf_max_spiked");
    if (x == 0.0) return Probability::from_raw(0.0, "cdf_max_spiked");
    const double y = transform_to_y(x);
    double loss = 0.0;
    double v = 0.0;
    bool have_value = false;
    if (detail::det_route_loss_digits(cfg, y) <= detail::kDetRouteMaxLossDigits) {
        LogScaled g = det_route_g(y, cfg, &loss);
        if (loss <= detail::kCancellationAbortDigits) {
            LogScaled f = g * detail::spiked_cdf_constant(cfg.m, cfg.n, cfg.p);
            f.log_mag -= static_cast<double>(
                cfg.n * log1pl(static_cast<long double>(cfg.eta)));
            v = f.value();
            have_value = true;
        }
        // else: the predicted-stable determinant route still cancelled past
        // the ceiling; the series representation is absolutely convergent,
        // so prefer it over failing outright.
    }
    if (!have_value) {
        v = series_cdf(y, cfg, &loss).value();
    }
    // Deep in the upper tail (y -> 1) both routes slowly saturate: the Psi
    // block of the determinants turns near-singular and the series piles
    // thousands of near-cancelling terms, so the real accuracy degrades to
    // ~1e-6 even while the elimination monitors stay below the abort
    // ceiling. A value marginally above 1 there is saturation roundoff, and
    // 1 is the closest defensible answer; outside that window the strict
    // overshoot gate stands.
    const double err_bar = std::pow(10.0, loss) * 1e-12 + 1e-11 +
                           (y > kSaturationY ? kSaturationSlack : 0.0);
    if (v > 1.0 && v - 1.0 <= err_bar) {
        return Probability::from_raw(1.0, "cdf_max_spiked");
    }
    return Probability::from_raw(v, "cdf_max_spiked");
}

Probability cdf_max_null(double x, const SpikedFConfig& cfg) {
    cfg.validate();
    check_x(x, "cdf_max_null");
    if (x == 0.0) return Probability::from_raw(0.0, "cdf_max_null");
    const double y = transform_to_y(x);
    const long m = cfg.m, n = cfg.n, alpha = cfg.alpha();
    if (alpha == 0) {
        // plain power law; direct evaluation keeps representable values exact
        return Probability::from_raw(std::pow(y, static_cast<double>(m * n)),
                                     "cdf_max_null");
    }
    LogScaled f = LogScaled::one();
    if (alpha > 0) {
        linalg::LogScaledMatrix w(alpha);
        for (long i = 1; i <= alpha; ++i) {
            for (long j = 1; j <= alpha; ++j) {
                w(i - 1, j - 1) = psi_build(i + 1, j + 1, y, cfg);
            }
        }
        double loss = 0.0;
        f = linalg::logdet_lu(w, &loss);
        if (loss > detail::kCancellationAbortDigits) {
            throw numerical_instability_error(
                "cdf_max_null: determinant lost more than 12 digits");
        }
        long double lk = 0.0L;
        for (long k = 1; k <= alpha; ++k) {
            lk += lf(m + n + k - 1) - lf(m + n + 2 * k - 2);
        }
        f.log_mag += static_cast<double>(lk);
    }
    f.log_mag += static_cast<double>(
        n * (m + alpha) * logl(static_cast<long double>(y)));
    return Probability::from_raw(f.value(), "cdf_max_null");
}

Probability cdf_alpha0_spiked(double x, long m, long n, double eta) {
    SpikedFConfig cfg{m, n, m, eta};
    cfg.validate_spiked();
    check_x(x, "cdf_alpha0_spiked");
    if (x == 0.0) return Probability::from_raw(0.0, "cdf_alpha0_spiked");
    const double y = transform_to_y(x);
    if (detail::det_route_loss_digits(cfg, y) <= kAlpha0DirectMaxLossDigits) {
        double loss = 0.0;
        LogScaled f = alpha0_closed_form(x, m, n, eta, &loss);
        if (loss <= detail::kCancellationAbortDigits) {
            const double v = f.value();
            // same saturation rule as the determinant route: an overshoot
            // within the monitored error bar (widened in the deep-saturation
            // window) means the value is 1 to evaluation accuracy
            const double err_bar = std::pow(10.0, loss) * 1e-12 + 1e-11 +
                                   (y > kSaturationY ? kSaturationSlack : 0.0);
            if (v > 1.0 && v - 1.0 <= err_bar) {
                return Probability::from_raw(1.0, "cdf_alpha0_spiked");
            }
            return Probability::from_raw(v, "cdf_alpha0_spiked");
        }
    }
    return Probability::from_raw(series_cdf(y, cfg).value(),
                                 "cdf_alpha0_spiked");
}

double joint_density_spiked(const std::vector<double>& lambdas,
                            const SpikedFConfig& cfg) {
    cfg.validate_spiked();
    validate_lambdas(lambdas, cfg, "joint_density_spiked");
    std::vector<double> xs(lambdas.size());
    for (size_t k = 0; k < lambdas.size(); ++k) {
        xs[k] = transform_to_y(lambdas[k]);
    }
    double loss = 0.0;
    LogScaled g = spike_direct_factor(xs, cfg, &loss);
    if (loss > detail::kCancellationAbortDigits || g.sign <= 0) {
        g = detail::spike_series_factor(xs, cfg);
    }
    LogScaled f = g * detail::joint_density_constant(cfg.m, cfg.n, cfg.p);
    f.log_mag += static_cast<double>(
        density_base_log(lambdas, cfg) -
        cfg.n * log1pl(static_cast<long double>(cfg.eta)));
    return f.value();
}

double joint_density_null(const std::vector<double>& lambdas,
                          const SpikedFConfig& cfg) {
    cfg.validate();
    validate_lambdas(lambdas, cfg, "joint_density_null");
    LogScaled f = detail::null_density_constant(cfg.m, cfg.n, cfg.p);
    f.log_mag += static_cast<double>(density_base_log(lambdas, cfg));
    return f.value();
}

namespace detail {

LogScaled jacobi_moment(long q, long d, long beta) {
    if (q < 0 || d < 0 || beta < 0) {
        throw std::invalid_argument("jacobi_moment: negative argument");
    }
    if (q >= beta && q < beta + d) return LogScaled::zero();
    long double lm = lf(q) - lf(q + d + 1);
    if (q >= beta + d) {
        lm += lf(q - beta) - lf(q - beta - d);
        return {1, static_cast<double>(lm)};
    }
    // q < beta: the falling factorial of q - beta alternates sign with d
    lm += lf(beta - q + d - 1) - lf(beta - q - 1);
    return {d % 2 == 0 ? 1 : -1, static_cast<double>(lm)};
}

LogScaled kernel_constant(long nn, long alpha, long beta) {
    if (nn < 0 || alpha < 0 || beta < 0) {
        throw std::invalid_argument("kernel_constant: negative argument");
    }
    long double lm = 0.0L;
    for (long j = 1; j <= alpha + 1; ++j) {
        lm += lf(nn + j - 1) + lf(nn + beta + j - 1) -
              lf(2 * nn + 2 * j + beta - 2);
    }
    for (long j = 0; j < nn; ++j) {
        lm += lf(j) + lf(j + 1) + lf(beta + j) - lf(beta + nn + j);
    }
    for (long j = 0; j < alpha; ++j) lm -= lf(j);
    return {1, static_cast<double>(lm)};
}

namespace {
// ln of the m-variate gamma-factorial product: sum_{j=0}^{a-1} ln (b-1-j)!
long double lmg(long a, long b) {
    long double s = 0.0L;
    for (long j = 0; j < a; ++j) s += lf(b - 1 - j);
    return s;
}
}  // namespace

LogScaled joint_density_constant(long m, long n, long p) {
    long double lm = lf(m - 1) - lf(n + p - 1) + lmg(m, n + p) - lmg(m, p) -
                     lmg(n, n) - lmg(n, m);
    return {1, static_cast<double>(lm)};
}

LogScaled null_density_constant(long m, long n, long p) {
    LogScaled k = joint_density_constant(m, n, p);
    k.log_mag += static_cast<double>(lf(n + p - 1) - lf(m - 1));
    return k;
}

LogScaled spiked_cdf_constant(long m, long n, long p) {
    long double lm = -lf(n - 1);
    for (long j = 1; j <= p - m; ++j) {
        lm += lf(m + n + j - 2) - lf(m + n + 2 * j - 2);
    }
    return {1, static_cast<double>(lm)};
}

LogScaled spike_series_factor(const std::vector<double>& xs,
                              const SpikedFConfig& cfg) {
    const long m = cfg.m, n = cfg.n, alpha = cfg.alpha();
    const long double lc = logl(static_cast<long double>(cfg.c_eta()));
    // h_u(x_1..x_n) by the online complete-homogeneous recurrence; v[k] holds
    // h_u of the first k+1 variables and is rescaled by powers of two when it
    // drifts toward the representable floor.
    std::vector<long double> v(static_cast<size_t>(n), 1.0L);
    long double vshift = 0.0L;
    constexpr long double kRescaleFloor = 0x1p-4000L;
    constexpr long double kLn2 = 0.69314718055994530942L;

    SignedLogSum acc;
    LogScaled running = LogScaled::zero();
    double prev_mag = -std::numeric_limits<double>::infinity();
    bool decaying = false;
    int quiet = 0;
    long u = 0;
    for (; u < kMaxSeriesTerms; ++u) {
        const long double h = v[static_cast<size_t>(n - 1)];
        LogScaled term{1, static_cast<double>(lf(n + alpha + m - 1 + u) -
                                              lf(m - 1 + u) + u * lc +
                                              logl(h) + vshift)};
        acc.add(term);
        running += term;
        if (term.log_mag < prev_mag) decaying = true;
        prev_mag = term.log_mag;
        const bool small = !running.is_zero() &&
                           term.log_mag - running.log_mag <= kSeriesRelStopLog;
        if (decaying && small) {
            if (++quiet >= 3) break;
        } else {
            quiet = 0;
        }
        v[0] *= static_cast<long double>(xs[0]);
        for (long k = 1; k < n; ++k) {
            v[static_cast<size_t>(k)] =
                v[static_cast<size_t>(k - 1)] +
                static_cast<long double>(xs[static_cast<size_t>(k)]) *
                    v[static_cast<size_t>(k)];
        }
        if (v[static_cast<size_t>(n - 1)] < kRescaleFloor) {
            for (auto& w : v) w = ldexpl(w, 4000);
            vshift -= 4000.0L * kLn2;
        }
    }
    if (u >= kMaxSeriesTerms) {
        throw numerical_instability_error(
            "spike_series_factor failed to converge within the term cap");
    }
    return acc.result();
}

double det_route_loss_digits(const SpikedFConfig& cfg, double y) {
    const double cy = cfg.c_eta() * y;
    if (!(cy > 0.0)) return std::numeric_limits<double>::infinity();
    if (cy >= 1.0) return 0.0;
    return static_cast<double>(cfg.m - 1) * std::log10(1.0 / cy);
}

}  // namespace detail

}  // namespace sfmax::cdf
