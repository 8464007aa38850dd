// fas-keygen: fluid-antenna-assisted physical-layer secret key generation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "fas_keygen/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace faskeygen {

SymmetricMatrix::SymmetricMatrix(int order) {
    if (order < 1)
        throw std::invalid_argument("SymmetricMatrix: order must be >= 1");
    n_ = order;
    a_.assign((std::size_t)order * order, 0.0);
}

SymmetricMatrix SymmetricMatrix::identity(int order) {
    SymmetricMatrix s(order);
    for (int i = 0; i < order; ++i)
        s.set(i, i, 1.0);
    return s;
}

double SymmetricMatrix::max_abs() const {
    double m = 0.0;
    for (double v : a_)
        m = std::max(m, std::fabs(v));
    return m;
}

SymmetricMatrix SymmetricMatrix::submatrix(const std::vector<int> &idx) const {
    SymmetricMatrix s((int)idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = i; j < idx.size(); ++j)
            s.set((int)i, (int)j, at(idx[i], idx[j]));
    return s;
}

// ---------- Bessel J0 ----------

double bessel_j0_series(double x, int terms) {
    // J0(x) = sum_k (-1)^k (x^2/4)^k / (k!)^2
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < terms; ++k) {
        term *= -q / ((double)k * (double)k);
        sum += term;
    }
    return sum;
}

static double bessel_j0_power_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 80; ++k) {
        term *= -q / ((double)k * (double)k);
        sum += term;
        if (std::fabs(term) < 1e-18)
            break;
    }
    return sum;
}

static double bessel_j0_asymptotic(double x) {
    // Hankel expansion: J0(x) = sqrt(2/(pi x)) [P cos(chi) - Q sin(chi)],
    // chi = x - pi/4, with the order-zero Hankel symbols
    // (0,m) = prod_{j=1..m} (-(2j-1)^2) / (m! 8^m).
    const double ax = std::fabs(x);
    double p = 1.0;
    double q = 0.0;
    double h = 1.0; // |(0,m)| / x^m, built incrementally
    double prev = 1.0;
    for (int m = 1; m <= 40; ++m) {
        const double odd = 2.0 * m - 1.0;
        h *= odd * odd / (8.0 * m * ax);
        if (h > prev)
            break; // asymptotic tail started growing: truncate at the minimum
        prev = h;
        const int k = m / 2;
        const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        if (m % 2 == 0)
            p += sgn * h;
        else
            q += -sgn * h;
        if (h < 1e-18)
            break;
    }
    const double chi = ax - 0.25 * M_PI;
    return std::sqrt(2.0 / (M_PI * ax)) * (p * std::cos(chi) - q * std::sin(chi));
}

double bessel_j0(double x) {
    if (!std::isfinite(x))
        throw std::domain_error("bessel_j0: non-finite argument");
    const double ax = std::fabs(x);
    if (ax <= 12.0)
        return bessel_j0_power_series(ax);
    return bessel_j0_asymptotic(ax);
}

// ---------- Jacobi eigendecomposition ----------

static double off_diag_frobenius(const SymmetricMatrix &a) {
    const int n = a.order();
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            s += 2.0 * a.at(i, j) * a.at(i, j);
    return std::sqrt(s);
}

static double frobenius(const SymmetricMatrix &a) {
    double s = 0.0;
    for (double v : a.data())
        s += v * v;
    return std::sqrt(s);
}

EigenDecomposition sym_eig(const SymmetricMatrix &a) {
    const int n = a.order();
    if (n > 1024)
        throw std::invalid_argument("sym_eig: order must be <= 1024");

    SymmetricMatrix w = a;
    RealMatrix v(n, n);
    for (int i = 0; i < n; ++i)
        v.at(i, i) = 1.0;

    const double norm = frobenius(a);
    const double tol = 1e-12 * std::max(norm, 1e-300);

    bool converged = (n == 1) || off_diag_frobenius(w) <= tol;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = w.at(p, q);
                if (std::fabs(apq) <= 1e-300)
                    continue;
                const double app = w.at(p, p);
                const double aqq = w.at(q, q);
                const double theta = 0.5 * (aqq - app) / apq;
                // stable rotation: t = sign(theta)/(|theta| + sqrt(theta^2+1))
                double t;
                if (std::fabs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0)
                        t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                w.set(p, p, app - t * apq);
                w.set(q, q, aqq + t * apq);
                w.set(p, q, 0.0);
                for (int k = 0; k < n; ++k) {
                    if (k == p || k == q)
                        continue;
                    const double akp = w.at(k, p);
                    const double akq = w.at(k, q);
                    w.set(k, p, c * akp - s * akq);
                    w.set(k, q, s * akp + c * akq);
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v.at(k, p);
                    const double vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
        converged = off_diag_frobenius(w) <= tol;
    }
    if (!converged)
        throw numeric_error("sym_eig: no convergence after 100 sweeps, off-diagonal residual = " +
                            std::to_string(off_diag_frobenius(w)));

    // sort descending; stable so degenerate eigenvalues keep input order
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i)
        diag[i] = w.at(i, i);
    std::stable_sort(perm.begin(), perm.end(), [&](int i, int j) { return diag[i] > diag[j]; });

    EigenDecomposition e;
    e.values.resize(n);
    e.vectors = RealMatrix(n, n);
    for (int k = 0; k < n; ++k) {
        const int src = perm[k];
        e.values[k] = diag[src];
        double first = 0.0;
        for (int i = 0; i < n; ++i) {
            if (std::fabs(v.at(i, src)) > 1e-12) {
                first = v.at(i, src);
                break;
            }
        }
        const double sgn = (first < 0.0) ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i)
            e.vectors.at(i, k) = sgn * v.at(i, src);
    }
    return e;
}

RealMatrix psd_sqrt(const SymmetricMatrix &a) {
    const EigenDecomposition e = sym_eig(a);
    const int n = a.order();
    const double lmax = e.values.empty() ? 0.0 : e.values.front();
    const double clamp = -1e-8 * std::max(lmax, 0.0);

    std::vector<double> root(n);
    for (int k = 0; k < n; ++k) {
        const double lam = e.values[k];
        if (lam < clamp)
            throw numeric_error("psd_sqrt: eigenvalue " + std::to_string(lam) +
                                " below clamp window, matrix is not PSD");
        root[k] = lam > 0.0 ? std::sqrt(lam) : 0.0;
    }

    RealMatrix s(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += e.vectors.at(i, k) * root[k] * e.vectors.at(j, k);
            s.at(i, j) = acc;
        }
    return s;
}

std::pair<double, std::vector<double>> leading_eigpair(const SymmetricMatrix &a) {
    const EigenDecomposition e = sym_eig(a);
    const int n = a.order();
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i)
        u[i] = e.vectors.at(i, 0);
    return {e.values.front(), u};
}

} // namespace faskeygen
