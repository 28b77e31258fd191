#pragma once

// Scalar special functions the distribution formulas are built from: rising
// factorials, Jacobi polynomials, and terminating Gauss hypergeometric sums.
// Everything here is a finite sum — no asymptotics, no infinite series.

#include <stdexcept>

#include "sfmax/log_scaled.hpp"

namespace sfmax::sf {

// (a)_k = a(a+1)...(a+k-1); (a)_0 = 1.  For a = -n (nonnegative integer n)
// this truncates: (-n)_k = (-1)^k n!/(n-k)! for k <= n, exact zero for k > n.
LogScaled pochhammer(double a, long k);

// P_n^{(a,b)}(x) by the terminating hypergeometric series
//   [(a+1)_n / n!] * 2F1(-n, n+a+b+1; 1+a; (1-x)/2).
// Exact n+1-term sum; for n < 0 the polynomial is identically zero.
double jacobi_p(long n, double a, double b, double x);

// Same series, accumulated sign+log. Only valid where every series term is
// nonnegative, which holds for integer a,b >= 0 and x >= 1 — exactly the
// regime of the determinant entries, whose values overflow doubles.
LogScaled jacobi_p_log(long n, long a, long b, double x);

// d^k/dx^k P_n^{(a,b)}(x) = 2^{-k} (n+a+b+1)_k P_{n-k}^{(a+k,b+k)}(x);
// zero when k > n.
double jacobi_p_deriv(long n, double a, double b, long k, double x);

// sum_{j=0}^{N} (-N)_j (b)_j z^j / (j! (c)_j) with N = -neg_int >= 0.
// Compensated accumulation in sign+log form; rejects a positive or
// non-integer-valued first parameter and c a nonpositive integer.
LogScaled gauss_2f1_terminating(double neg_int, double b, double c, double z);

// 2F1(n+alpha+1, k+1; k+2; z) for the arguments arising inside the Omega
// determinant column, via the Euler transformation
//   2F1(a,b;c;z) = (1-z)^{c-a-b} 2F1(c-a, c-b; c; z),
// under which c-a = k+1-n-alpha <= 0 makes the series terminate. Valid for
// every z < 1 (z <= 0 in actual use); rejects z >= 1 and out-of-range k.
double omega_2f1(long n, long alpha, long k, double z);
LogScaled omega_2f1_log(long n, long alpha, long k, double z);

}  // namespace sfmax::sf
