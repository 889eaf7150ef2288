#include "evatrap/atomdata.hpp"
#include "evatrap/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>

namespace evatrap {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_int factorial(int n) {
    cpp_int r = 1;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

bool triangle_twice(int a, int b, int c) {
    if ((a + b + c) % 2 != 0) return false;
    return c >= std::abs(a - b) && c <= a + b;
}

// Delta(abc)^2 = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!, arguments doubled.
cpp_rational triangle_coefficient_sq(int a, int b, int c) {
    cpp_int num = factorial((a + b - c) / 2) * factorial((a - b + c) / 2) *
                  factorial((-a + b + c) / 2);
    return cpp_rational(num, factorial((a + b + c) / 2 + 1));
}

}  // namespace

bool triangle_ok(HalfInteger a, HalfInteger b, HalfInteger c) {
    return triangle_twice(a.twice(), b.twice(), c.twice());
}

double wigner6j_twice(int j1, int j2, int j3, int j4, int j5, int j6) {
    for (int j : {j1, j2, j3, j4, j5, j6})
        if (j < 0) throw InvalidArgument("wigner6j: negative angular momentum");

    if (!triangle_twice(j1, j2, j3) || !triangle_twice(j1, j5, j6) ||
        !triangle_twice(j4, j2, j6) || !triangle_twice(j4, j5, j3))
        return 0.0;

    // Racah formula, all quantities now integers.
    const int a1 = (j1 + j2 + j3) / 2;
    const int a2 = (j1 + j5 + j6) / 2;
    const int a3 = (j4 + j2 + j6) / 2;
    const int a4 = (j4 + j5 + j3) / 2;
    const int b1 = (j1 + j2 + j4 + j5) / 2;
    const int b2 = (j2 + j3 + j5 + j6) / 2;
    const int b3 = (j3 + j1 + j6 + j4) / 2;

    const int t_min = std::max({a1, a2, a3, a4});
    const int t_max = std::min({b1, b2, b3});

    cpp_rational sum = 0;
    for (int t = t_min; t <= t_max; ++t) {
        cpp_int den = factorial(t - a1) * factorial(t - a2) * factorial(t - a3) *
                      factorial(t - a4) * factorial(b1 - t) * factorial(b2 - t) *
                      factorial(b3 - t);
        cpp_rational term(factorial(t + 1), den);
        if (t % 2) sum -= term;
        else sum += term;
    }

    const cpp_rational delta_sq = triangle_coefficient_sq(j1, j2, j3) *
                                  triangle_coefficient_sq(j1, j5, j6) *
                                  triangle_coefficient_sq(j4, j2, j6) *
                                  triangle_coefficient_sq(j4, j5, j3);

    // value = sum * sqrt(delta_sq); square exactly, then one rounding each.
    if (sum == 0) return 0.0;
    const cpp_rational value_sq = sum * sum * delta_sq;
    const double magnitude = std::sqrt(static_cast<long double>(
        static_cast<long double>(numerator(value_sq)) /
        static_cast<long double>(denominator(value_sq))));
    return sum < 0 ? -magnitude : magnitude;
}

double wigner6j(HalfInteger j1, HalfInteger j2, HalfInteger j3,
                HalfInteger j4, HalfInteger j5, HalfInteger j6) {
    return wigner6j_twice(j1.twice(), j2.twice(), j3.twice(), j4.twice(), j5.twice(),
                          j6.twice());
}

double wigner6j(double j1, double j2, double j3, double j4, double j5, double j6) {
    return wigner6j(HalfInteger::from_double(j1), HalfInteger::from_double(j2),
                    HalfInteger::from_double(j3), HalfInteger::from_double(j4),
                    HalfInteger::from_double(j5), HalfInteger::from_double(j6));
}

}  // namespace evatrap
