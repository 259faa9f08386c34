#pragma once

#include <array>
#include <cstddef>

namespace quadsim::integrate {

template <std::size_t N>
using Vec = std::array<double, N>;

namespace detail {
template <std::size_t N>
inline Vec<N> axpy(const Vec<N>& x, double a, const Vec<N>& k) {
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + a * k[i];
    return out;
}
}  // namespace detail

// Classical fourth-order Runge-Kutta. `deriv` is a callable x -> dx/dt;
// the system is autonomous over one step (inputs held constant).
template <std::size_t N, typename Deriv>
Vec<N> rk4(Deriv&& deriv, const Vec<N>& x, double dt) {
    const double half = dt / 2;
    const Vec<N> k1 = deriv(x);
    const Vec<N> k2 = deriv(detail::axpy(x, half, k1));
    const Vec<N> k3 = deriv(detail::axpy(x, half, k2));
    const Vec<N> k4 = deriv(detail::axpy(x, dt, k3));
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = x[i] + dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    return out;
}

template <std::size_t N, typename Deriv>
Vec<N> euler(Deriv&& deriv, const Vec<N>& x, double dt) {
    return detail::axpy(x, dt, deriv(x));
}

}  // namespace quadsim::integrate
