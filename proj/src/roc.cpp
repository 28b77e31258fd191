#include "sfmax/roc.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sfmax::roc {

namespace {

void check_unit_interval(double v, bool open, const char* op, const char* name) {
    const bool ok = std::isfinite(v) && (open ? v > 0.0 && v < 1.0
                                             : v >= 0.0 && v <= 1.0);
    if (!ok) {
        std::ostringstream os;
        os << op << ": " << name << " = " << v << " outside "
           << (open ? "(0, 1)" : "[0, 1]");
        throw std::invalid_argument(os.str());
    }
}

void check_gamma(double gamma, const char* op) {
    if (!std::isfinite(gamma) || !(gamma > 0.0)) {
        std::ostringstream os;
        os << op << ": gamma = " << gamma << " must be > 0";
        throw std::invalid_argument(os.str());
    }
}

void check_threshold(double lambda_th, const char* op) {
    if (!std::isfinite(lambda_th) || lambda_th < 0.0) {
        std::ostringstream os;
        os << op << ": threshold " << lambda_th
           << " must be a finite value >= 0";
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::exact: return "exact";
        case Provenance::closed_form_alpha0: return "closed_form_alpha0";
        case Provenance::closed_form_n1: return "closed_form_n1";
        case Provenance::asymptotic: return "asymptotic";
        case Provenance::upper_bound: return "upper_bound";
        case Provenance::empirical: return "empirical";
    }
    return "unknown";
}

double p_false_alarm(double lambda_th, const DetectorConfig& cfg) {
    cfg.base.validate();
    check_threshold(lambda_th, "p_false_alarm");
    return 1.0 - cdf::cdf_max_null(cfg.kappa * lambda_th, cfg.base).value();
}

double p_detect(double gamma, double lambda_th, const DetectorConfig& cfg) {
    check_gamma(gamma, "p_detect");
    check_threshold(lambda_th, "p_detect");
    SpikedFConfig spiked = cfg.base;
    spiked.eta = gamma;
    return 1.0 - cdf::cdf_max_spiked(cfg.kappa * lambda_th, spiked).value();
}

double threshold_for_pfa(double alpha_level, const DetectorConfig& cfg) {
    cfg.base.validate();
    check_unit_interval(alpha_level, true, "threshold_for_pfa", "alpha_level");
    // p_false_alarm is continuous and strictly decreasing from 1 toward 0,
    // so grow the upper bracket geometrically and bisect.
    double lo = 0.0, hi = 1.0;
    while (p_false_alarm(hi, cfg) > alpha_level) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) {
            throw numerical_instability_error(
                "threshold_for_pfa: failed to bracket the requested rate");
        }
    }
    for (int step = 0; step < 200; ++step) {
        const double mid = 0.5 * (lo + hi);
        const double pfa = p_false_alarm(mid, cfg);
        if (std::fabs(pfa - alpha_level) <= 1e-10 && hi - lo <= 1e-14 * mid) {
            return mid;
        }
        (pfa > alpha_level ? lo : hi) = mid;
    }
    throw numerical_instability_error(
        "threshold_for_pfa: no convergence within 200 bisection steps");
}

std::vector<RocPoint> roc_exact(double gamma, const DetectorConfig& cfg,
                                const std::vector<double>& pf_grid) {
    check_gamma(gamma, "roc_exact");
    cfg.base.validate();
    std::vector<RocPoint> out;
    out.reserve(pf_grid.size());
    for (double pf : pf_grid) {
        check_unit_interval(pf, true, "roc_exact", "pf");
        const double th = threshold_for_pfa(pf, cfg);
        out.push_back({pf, p_detect(gamma, th, cfg), Provenance::exact});
    }
    return out;
}

double roc_alpha0_closed_form(double gamma, long m, long n, double pf) {
    check_gamma(gamma, "roc_alpha0_closed_form");
    SpikedFConfig cfg{m, n, m, gamma};
    cfg.validate_spiked();
    check_unit_interval(pf, false, "roc_alpha0_closed_form", "pf");
    if (pf == 0.0) return 0.0;
    if (pf == 1.0) return 1.0;
    // Null threshold solves (x/(1+x))^{mn} = 1 - pf; 1-u is formed from
    // expm1 so small pf does not cancel.
    const double lq = std::log1p(-pf) / static_cast<double>(m * n);
    const double u = std::exp(lq);
    const double one_minus_u = -std::expm1(lq);
    const double x_th = u / one_minus_u;
    return 1.0 - cdf::cdf_alpha0_spiked(x_th, m, n, gamma).value();
}

double roc_n1_closed_form(double gamma, long m, double pf) {
    check_gamma(gamma, "roc_n1_closed_form");
    if (m < 2) {
        std::ostringstream os;
        os << "roc_n1_closed_form: m = " << m << " must be >= 2";
        throw std::invalid_argument(os.str());
    }
    check_unit_interval(pf, false, "roc_n1_closed_form", "pf");
    if (pf == 1.0) return 1.0;
    const double one_minus_w = -std::expm1(std::log1p(-pf) / static_cast<double>(m));
    return 1.0 - (1.0 - pf) / (1.0 + gamma * one_minus_w);
}

double roc_asymptotic(const AsymptoticRegime& regime, double pf) {
    if (!std::isfinite(regime.c) || regime.c < 0.0) {
        std::ostringstream os;
        os << "roc_asymptotic: c = " << regime.c << " must be >= 0";
        throw std::invalid_argument(os.str());
    }
    if (regime.n < 1) {
        std::ostringstream os;
        os << "roc_asymptotic: n = " << regime.n << " must be >= 1";
        throw std::invalid_argument(os.str());
    }
    check_unit_interval(pf, false, "roc_asymptotic", "pf");
    if (pf == 1.0) return 1.0;
    const double base =
        1.0 - regime.c / static_cast<double>(regime.n) * std::log1p(-pf);
    return 1.0 - (1.0 - pf) / std::pow(base, static_cast<double>(regime.n));
}

double roc_asymptotic_upper_bound(double c, double pf) {
    if (!std::isfinite(c) || c < 0.0) {
        std::ostringstream os;
        os << "roc_asymptotic_upper_bound: c = " << c << " must be >= 0";
        throw std::invalid_argument(os.str());
    }
    check_unit_interval(pf, false, "roc_asymptotic_upper_bound", "pf");
    if (pf == 1.0) return 1.0;
    return -std::expm1((c + 1.0) * std::log1p(-pf));
}

}  // namespace sfmax::roc
