#include "sfmax/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "sfmax/linalg.hpp"

namespace sfmax::mc {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
    const unsigned __int128 w = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(w >> 64);
    lo = static_cast<std::uint64_t>(w);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

// One CN(0,1) draw: exponential magnitude-squared, uniform phase.
inline linalg::cplx complex_gaussian(Philox4x64& rng) {
    const double r = std::sqrt(-std::log(rng.next_u01()));
    const double phase = kTwoPi * rng.next_u01();
    return {r * std::cos(phase), r * std::sin(phase)};
}

void check_trials(long trials, const char* op) {
    if (trials < 1) {
        std::ostringstream os;
        os << op << ": trials = " << trials << " must be >= 1";
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

void Philox4x64::block(const std::uint64_t key[2], const std::uint64_t ctr[4],
                       std::uint64_t out[4]) {
    std::uint64_t k0 = key[0], k1 = key[1];
    std::uint64_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, c0, hi0, lo0);
        mulhilo(kPhiloxM1, c2, hi1, lo1);
        const std::uint64_t n0 = hi1 ^ c1 ^ k0;
        const std::uint64_t n2 = hi0 ^ c3 ^ k1;
        c0 = n0;
        c1 = lo1;
        c2 = n2;
        c3 = lo0;
    }
    out[0] = c0;
    out[1] = c1;
    out[2] = c2;
    out[3] = c3;
}

std::uint64_t Philox4x64::next_raw() {
    if (buf_pos_ >= 4) {
        // Advance the counter before generating, with carry across all four
        // words, so the raw stream is bit-identical to numpy's Philox bit
        // generator for the same (counter, key) seed.  Substreams start at
        // (0, trial, 0, 0); the carry only reaches ctr_[1] after 2^64 blocks,
        // which a single trial never consumes.
        for (int w = 0; w < 4; ++w) {
            if (++ctr_[w] != 0) {
                break;
            }
        }
        block(key_, ctr_, buf_);
        buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
}

double Philox4x64::next_u01() {
    return (static_cast<double>(next_raw() >> 11) + 0.5) * 0x1p-53;
}

double sample_lambda_max(const SpikedFConfig& cfg, Hypothesis hyp,
                         Philox4x64& rng) {
    if (hyp == Hypothesis::H1) {
        cfg.validate_spiked();
    } else {
        cfg.validate();
    }
    const long m = cfg.m, n = cfg.n, p = cfg.p;
    const double spike_scale = std::sqrt(1.0 + cfg.eta);
    for (int attempt = 0;; ++attempt) {
        linalg::ComplexMatrix xs(m, n), ns(m, p);
        for (long i = 0; i < m; ++i) {
            for (long j = 0; j < n; ++j) xs(i, j) = complex_gaussian(rng);
        }
        if (hyp == Hypothesis::H1) {
            // rank-one spike on the first coordinate: scale that row
            for (long j = 0; j < n; ++j) xs(0, j) *= spike_scale;
        }
        for (long i = 0; i < m; ++i) {
            for (long j = 0; j < p; ++j) ns(i, j) = complex_gaussian(rng);
        }
        linalg::ComplexMatrix sig(m, m), noi(m, m);
        for (long i = 0; i < m; ++i) {
            for (long j = i; j < m; ++j) {
                linalg::cplx s{0.0, 0.0}, t{0.0, 0.0};
                for (long k = 0; k < n; ++k) s += xs(i, k) * std::conj(xs(j, k));
                for (long k = 0; k < p; ++k) t += ns(i, k) * std::conj(ns(j, k));
                sig(i, j) = s / static_cast<double>(n);
                sig(j, i) = std::conj(sig(i, j));
                noi(i, j) = t / static_cast<double>(p);
                noi(j, i) = std::conj(noi(i, j));
            }
        }
        try {
            return linalg::max_generalized_eig(sig, noi);
        } catch (const numerical_instability_error&) {
            // noise covariance failed to factor; redraw this trial once from
            // the generator's following blocks
            if (attempt >= 1) throw;
        }
    }
}

double EmpiricalCdf::at(double x) const {
    const auto it = std::upper_bound(samples.begin(), samples.end(), x);
    return static_cast<double>(it - samples.begin()) /
           static_cast<double>(count);
}

double EmpiricalCdf::quantile(double q) const {
    if (!(q > 0.0) || !(q < 1.0)) {
        std::ostringstream os;
        os << "EmpiricalCdf::quantile: q = " << q << " outside (0, 1)";
        throw std::invalid_argument(os.str());
    }
    if (samples.empty()) {
        throw std::invalid_argument("EmpiricalCdf::quantile: no samples");
    }
    const long idx =
        static_cast<long>(std::ceil(q * static_cast<double>(count))) - 1;
    const long clamped = std::min(std::max(idx, 0L), count - 1);
    return samples[static_cast<size_t>(clamped)];
}

EmpiricalCdf empirical_cdf(const SpikedFConfig& cfg, Hypothesis hyp,
                           long trials, RngStream stream, int threads) {
    if (hyp == Hypothesis::H1) {
        cfg.validate_spiked();
    } else {
        cfg.validate();
    }
    check_trials(trials, "empirical_cdf");
    std::vector<double> samples(static_cast<size_t>(trials));
    const long workers =
        std::max(1L, std::min(static_cast<long>(threads), trials));
    auto run_range = [&](long lo, long hi) {
        for (long t = lo; t < hi; ++t) {
            Philox4x64 rng(stream, static_cast<std::uint64_t>(t));
            samples[static_cast<size_t>(t)] = sample_lambda_max(cfg, hyp, rng);
        }
    };
    if (workers == 1) {
        run_range(0, trials);
    } else {
        // static contiguous partition: sample t depends only on (stream, t),
        // so the sample set is identical for every worker count
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
        pool.reserve(static_cast<size_t>(workers));
        for (long w = 0; w < workers; ++w) {
            const long lo = trials * w / workers;
            const long hi = trials * (w + 1) / workers;
            pool.emplace_back([&, lo, hi, w] {
                try {
                    run_range(lo, hi);
                } catch (...) {
                    errors[static_cast<size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& err : errors) {
            if (err) std::rethrow_exception(err);
        }
    }
    std::sort(samples.begin(), samples.end());
    EmpiricalCdf out;
    out.samples = std::move(samples);
    out.count = trials;
    return out;
}

std::vector<roc::RocPoint> empirical_roc(const SpikedFConfig& cfg, double gamma,
                                         long trials,
                                         const std::vector<double>& pf_grid,
                                         RngStream stream, int threads) {
    if (!std::isfinite(gamma) || !(gamma > 0.0)) {
        std::ostringstream os;
        os << "empirical_roc: gamma = " << gamma << " must be > 0";
        throw std::invalid_argument(os.str());
    }
    check_trials(trials, "empirical_roc");
    const EmpiricalCdf h0 = empirical_cdf(cfg, Hypothesis::H0, trials, stream,
                                          threads);
    SpikedFConfig spiked = cfg;
    spiked.eta = gamma;
    const EmpiricalCdf h1 =
        empirical_cdf(spiked, Hypothesis::H1, trials,
                      {stream.seed, stream.stream_id + 1}, threads);
    std::vector<roc::RocPoint> out;
    out.reserve(pf_grid.size());
    for (double pf : pf_grid) {
        if (!(pf > 0.0) || !(pf < 1.0)) {
            std::ostringstream os;
            os << "empirical_roc: pf = " << pf << " outside (0, 1)";
            throw std::invalid_argument(os.str());
        }
        const double th = h0.quantile(1.0 - pf);
        out.push_back({pf, 1.0 - h1.at(th), roc::Provenance::empirical});
    }
    return out;
}

double ks_distance(const EmpiricalCdf& ecdf,
                   const std::function<double(double)>& analytic_cdf) {
    if (ecdf.samples.empty()) {
        throw std::invalid_argument("ks_distance: empty sample set");
    }
    const double n = static_cast<double>(ecdf.count);
    double d = 0.0;
    for (size_t i = 0; i < ecdf.samples.size(); ++i) {
        const double f = analytic_cdf(ecdf.samples[i]);
        const double hi = (static_cast<double>(i) + 1.0) / n - f;
        const double lo = f - static_cast<double>(i) / n;
        d = std::max({d, hi, lo});
    }
    return d;
}

}  // namespace sfmax::mc
