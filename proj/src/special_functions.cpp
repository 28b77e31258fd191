#include "sfmax/special_functions.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace sfmax {

namespace {

constexpr double kLn10 = 2.302585092994045684;

// Cumulative ln k! table built once in long double; indices past the table
// (never hit by the supported dimension envelope, but kept correct anyway)
// fall through to lgammal.
constexpr long kFactTableSize = 20001;

const std::vector<long double>& fact_table() {
    static const std::vector<long double> table = [] {
        std::vector<long double> t(kFactTableSize);
        t[0] = 0.0L;
        for (long k = 1; k < kFactTableSize; ++k) {
            t[k] = t[k - 1] + std::log(static_cast<long double>(k));
        }
        return t;
    }();
    return table;
}

}  // namespace

long double log_factorial_l(long n) {
    if (n < 0) {
        std::ostringstream os;
        os << "log_factorial: negative argument " << n;
        throw std::invalid_argument(os.str());
    }
    if (n < kFactTableSize) return fact_table()[n];
    return lgammal(static_cast<long double>(n) + 1.0L);
}

double log_factorial(long n) { return static_cast<double>(log_factorial_l(n)); }

double log_gamma(double x) {
    if (!(x > 0.0)) {
        std::ostringstream os;
        os << "log_gamma: argument " << x << " must be positive";
        throw std::invalid_argument(os.str());
    }
    double r = std::rint(x);
    if (r == x && r < static_cast<double>(kFactTableSize)) {
        return log_factorial(static_cast<long>(r) - 1);
    }
    return static_cast<double>(lgammal(static_cast<long double>(x)));
}

LogScaled SignedLogSum::result() const {
    if (terms_.empty()) return LogScaled::zero();
    double max_log = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) max_log = std::max(max_log, t.log_mag);
    // Kahan-compensated sum of sign * exp(log - max) in long double.
    long double s = 0.0L, comp = 0.0L;
    for (const auto& t : terms_) {
        long double v = static_cast<long double>(t.sign) *
                        std::exp(static_cast<long double>(t.log_mag) - max_log);
        long double y = v - comp;
        long double u = s + y;
        comp = (u - s) - y;
        s = u;
    }
    if (s == 0.0L) return LogScaled::zero();
    return {s > 0.0L ? 1 : -1,
            max_log + static_cast<double>(std::log(std::fabs(s)))};
}

double SignedLogSum::cancellation_digits() const {
    if (terms_.empty()) return 0.0;
    LogScaled r = result();
    if (r.is_zero()) return std::numeric_limits<double>::infinity();
    double max_log = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) max_log = std::max(max_log, t.log_mag);
    return std::max(0.0, (max_log - r.log_mag) / kLn10);
}

namespace sf {

LogScaled pochhammer(double a, long k) {
    if (k < 0) {
        throw std::invalid_argument("pochhammer: order k must be >= 0");
    }
    if (k == 0) return LogScaled::one();
    int sign = 1;
    long double lm = 0.0L;
    for (long i = 0; i < k; ++i) {
        double f = a + static_cast<double>(i);
        if (f == 0.0) return LogScaled::zero();
        if (f < 0.0) sign = -sign;
        lm += std::log(std::fabs(static_cast<long double>(f)));
    }
    return {sign, static_cast<double>(lm)};
}

double jacobi_p(long n, double a, double b, double x) {
    if (n < 0) return 0.0;
    // Terminating series around x = 1:
    //   P_n^{(a,b)}(x) = ((a+1)_n / n!) sum_j t_j,
    //   t_0 = 1,  t_{j+1}/t_j = (j-n)(n+a+b+1+j) w / ((j+1)(a+1+j)),
    // with w = (1-x)/2.
    const long double w = (1.0L - static_cast<long double>(x)) / 2.0L;
    long double term = 1.0L, sum = 0.0L, comp = 0.0L;
    for (long j = 0;; ++j) {
        long double y = term - comp;
        long double u = sum + y;
        comp = (u - sum) - y;
        sum = u;
        if (j == n) break;
        long double num = static_cast<long double>(j - n) *
                          (static_cast<long double>(n) + a + b + 1.0L + j);
        long double den = static_cast<long double>(j + 1) * (a + 1.0L + j);
        term *= num / den * w;
    }
    // Prefactor (a+1)_n / n! as a running product.  For integer a every
    // intermediate value is a binomial coefficient, so the loop stays exact
    // while the products fit the significand; this keeps P_n^{(a,b)}(1)
    // bit-identical to the endpoint value (a+1)_n / n!.
    long double pre = 1.0L;
    for (long i = 1; i <= n; ++i) {
        pre = pre * (static_cast<long double>(a) + i) / i;
    }
    return static_cast<double>(pre * sum);
}

LogScaled jacobi_p_log(long n, long a, long b, double x) {
    if (n < 0) return LogScaled::zero();
    if (a < 0 || b < 0 || x < 1.0) {
        throw std::invalid_argument(
            "jacobi_p_log: requires integer a,b >= 0 and x >= 1 "
            "(the all-positive-series regime)");
    }
    // Every series term is >= 0 here: |(-n)_j| w^j = (n!/(n-j)!) ((x-1)/2)^j.
    // Streaming log-sum-exp over term logs, built incrementally.
    const double lw = x == 1.0 ? -std::numeric_limits<double>::infinity()
                               : std::log((x - 1.0) / 2.0);
    double lt = 0.0;  // ln t_0
    double max_log = 0.0;
    long double scaled = 1.0L;  // sum of exp(lt_j - max_log)
    for (long j = 0; j < n; ++j) {
        if (lw == -std::numeric_limits<double>::infinity()) break;
        lt += std::log(static_cast<double>(n - j)) +
              std::log(static_cast<double>(n + a + b + 1 + j)) -
              std::log(static_cast<double>(j + 1)) -
              std::log(static_cast<double>(a + 1 + j)) + lw;
        if (lt <= max_log) {
            scaled += std::exp(static_cast<long double>(lt - max_log));
        } else {
            scaled = scaled * std::exp(static_cast<long double>(max_log - lt)) + 1.0L;
            max_log = lt;
        }
    }
    double lp = log_factorial(a + n) - log_factorial(a) - log_factorial(n);
    return {1, lp + max_log + static_cast<double>(std::log(scaled))};
}

double jacobi_p_deriv(long n, double a, double b, long k, double x) {
    if (k < 0) {
        throw std::invalid_argument("jacobi_p_deriv: order k must be >= 0");
    }
    if (n < 0 || k > n) return 0.0;
    if (k == 0) return jacobi_p(n, a, b, x);
    LogScaled pre = pochhammer(n + a + b + 1.0, k);
    pre.log_mag -= static_cast<double>(k) * std::log(2.0);
    return pre.value() * jacobi_p(n - k, a + k, b + k, x);
}

LogScaled gauss_2f1_terminating(double neg_int, double b, double c, double z) {
    double r = std::rint(neg_int);
    if (neg_int > 0.0 || std::fabs(neg_int - r) > 1e-9) {
        std::ostringstream os;
        os << "gauss_2f1_terminating: first parameter " << neg_int
           << " must be a nonpositive integer";
        throw std::invalid_argument(os.str());
    }
    double cr = std::rint(c);
    if (c <= 0.0 && std::fabs(c - cr) <= 1e-9) {
        std::ostringstream os;
        os << "gauss_2f1_terminating: c = " << c
           << " is a nonpositive integer (series pole)";
        throw std::invalid_argument(os.str());
    }
    const long big_n = static_cast<long>(-r);
    SignedLogSum sum;
    LogScaled term = LogScaled::one();
    sum.add(term);
    for (long j = 0; j < big_n; ++j) {
        double num = (static_cast<double>(j) - static_cast<double>(big_n)) *
                     (b + static_cast<double>(j));
        double den = static_cast<double>(j + 1) * (c + static_cast<double>(j));
        term *= LogScaled::from_value(num / den) * LogScaled::from_value(z);
        if (term.is_zero()) break;
        sum.add(term);
    }
    return sum.result();
}

LogScaled omega_2f1_log(long n, long alpha, long k, double z) {
    if (n < 1 || alpha < 0) {
        throw std::invalid_argument("omega_2f1: requires n >= 1, alpha >= 0");
    }
    if (k < 0 || k > n + alpha - 1) {
        std::ostringstream os;
        os << "omega_2f1: k = " << k << " outside [0, " << n + alpha - 1 << "]";
        throw std::invalid_argument(os.str());
    }
    if (!(z < 1.0)) {
        std::ostringstream os;
        os << "omega_2f1: z = " << z << " outside the domain z < 1";
        throw std::invalid_argument(os.str());
    }
    // Euler transformation: 2F1(n+alpha+1, k+1; k+2; z)
    //   = (1-z)^{-(n+alpha)} 2F1(k+1-n-alpha, 1; k+2; z),
    // and the right-hand series terminates after n+alpha-k terms. For z <= 0
    // all of its terms are positive, so this evaluation never cancels.
    LogScaled series = gauss_2f1_terminating(
        static_cast<double>(k + 1 - n - alpha), 1.0,
        static_cast<double>(k + 2), z);
    LogScaled euler{1, -static_cast<double>(n + alpha) * std::log1p(-z)};
    return series * euler;
}

double omega_2f1(long n, long alpha, long k, double z) {
    return omega_2f1_log(n, alpha, k, z).value();
}

}  // namespace sf
}  // namespace sfmax
