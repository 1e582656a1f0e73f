#include "wcl/core.hpp"

#include <cmath>

namespace wcl {

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

Matrix Rng::hermitian(Index n) {
    Matrix g(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) g(i, j) = cnormal();
    return 0.5 * (g + g.adjoint());
}

Matrix Rng::unitary(Index n) {
    Matrix g(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) g(i, j) = cnormal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index k = 0; k < n; ++k) {
        const Complex rkk = r(k, k);
        const double a = std::abs(rkk);
        if (a > 0) q.col(k) *= rkk / a;
    }
    return q;
}

Matrix Rng::density(Index n) {
    Matrix g(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) g(i, j) = cnormal();
    Matrix rho = g * g.adjoint();
    rho /= rho.trace();
    return rho;
}

namespace {

// 20-point Gauss-Legendre nodes/weights on [-1,1]
constexpr int kGlN = 20;
constexpr double kGlX[kGlN] = {
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188,
    -0.7463319064601508, -0.6360536807265150, -0.5108670019508271, -0.3737060887154195,
    -0.2277858511416451, -0.0765265211334973, 0.0765265211334973,  0.2277858511416451,
    0.3737060887154195,  0.5108670019508271,  0.6360536807265150,  0.7463319064601508,
    0.8391169718222188,  0.9122344282513259,  0.9639719272779138,  0.9931285991850949};
constexpr double kGlW[kGlN] = {
    0.0176140071391521, 0.0406014298003869, 0.0626720483341091, 0.0832767415767048,
    0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183820,
    0.1491729864726037, 0.1527533871307258, 0.1527533871307258, 0.1491729864726037,
    0.1420961093183820, 0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
    0.0832767415767048, 0.0626720483341091, 0.0406014298003869, 0.0176140071391521};

double gl_panel(double a, double b, double x, int panels) {
    // integrand exp(s^2 - 2 x s) on [a,b], split into panels
    double total = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double c = 0.5 * (2 * lo + h);
        const double r = 0.5 * h;
        double acc = 0.0;
        for (int k = 0; k < kGlN; ++k) {
            const double s = c + r * kGlX[k];
            acc += kGlW[k] * std::exp(s * (s - 2.0 * x));
        }
        total += acc * r;
    }
    return total;
}

}  // namespace

double dawson(double x) {
    if (x < 0) return -dawson(-x);
    if (x < 1e-8) return x;
    // D(x) = int_0^x exp(t^2 - x^2) dt; substituting s = x - t gives
    // int_0^x exp(s^2 - 2 x s) ds, a decaying integrand safe to quadrate.
    // Tail beyond s* = 40/x carries less than 1e-17 of the peak.
    const double smax = std::min(x, 40.0 / x);
    const int panels = std::max(4, static_cast<int>(std::ceil(smax * 3)) + 2);
    return gl_panel(0.0, smax, x, panels);
}

}  // namespace wcl
