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

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fas_keygen/numerics.hpp"
#include "fas_keygen/rng.hpp"

using namespace faskeygen;

namespace {

// 30-digit reference values (mpmath)
struct J0Ref {
    double x;
    double value;
};
const J0Ref k_j0_refs[] = {
    {0.1, 0.997501562066040032},    {0.5, 0.93846980724081290423},
    {1.0, 0.76519768655796655145},  {2.0, 0.22389077914123566805},
    {3.0, -0.26005195490193343762}, {4.0, -0.39714980986384737229},
    {5.0, -0.17759677131433830435}, {6.0, 0.15064525725099693166},
    {7.0, 0.30007927051955559665},  {8.0, 0.17165080713755390609},
    {9.0, -0.090333611182876134336},{10.0, -0.2459357644513483352},
    {11.0, -0.17119030040719608835},{11.5, -0.067653948111665228432},
    {12.0, 0.047689310796833536624},{12.5, 0.14688405470042110231},
    {13.0, 0.206926102377067811},   {15.0, -0.014224472826780773234},
    {18.0, -0.013355805721984110885},{20.0, 0.16702466434058315473},
    {25.0, 0.096266783275958116174},{30.0, -0.086367983581040211336},
    {35.0, -0.12684568275631256981},{40.0, 0.0073668905842372895535},
    {45.0, 0.11581867067325632359}, {50.0, 0.055812327669251815005},
};

SymmetricMatrix from_rows(const std::vector<std::vector<double>> &rows) {
    SymmetricMatrix s((int)rows.size());
    for (int i = 0; i < (int)rows.size(); ++i)
        for (int j = i; j < (int)rows.size(); ++j)
            s.set(i, j, rows[i][j]);
    return s;
}

SymmetricMatrix random_symmetric(int n, CounterRng &rng) {
    SymmetricMatrix s(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            s.set(i, j, 2.0 * rng.next_uniform() - 1.0);
    return s;
}

double reconstruction_error(const SymmetricMatrix &a, const EigenDecomposition &e) {
    const int n = a.order();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += e.vectors.at(i, k) * e.values[k] * e.vectors.at(j, k);
            worst = std::max(worst, std::fabs(acc - a.at(i, j)));
        }
    return worst;
}

double orthonormality_error(const EigenDecomposition &e) {
    const int n = e.order();
    double worst = 0.0;
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += e.vectors.at(i, p) * e.vectors.at(i, q);
            worst = std::max(worst, std::fabs(acc - (p == q ? 1.0 : 0.0)));
        }
    return worst;
}

} // namespace

TEST_CASE("bessel_j0 anchors") {
    CHECK(bessel_j0(0.0) == 1.0);
    CHECK(std::fabs(bessel_j0(2.404825557695773)) <= 1e-9); // first root
    CHECK(std::fabs(bessel_j0(M_PI) - (-0.304242)) <= 1e-6);
    CHECK(std::fabs(bessel_j0(M_PI) - (-0.3042421776440938642)) <= 1e-12);
    CHECK(bessel_j0(-3.0) == bessel_j0(3.0)); // even function
}

TEST_CASE("bessel_j0 against 30-digit references, |x| <= 50") {
    for (const auto &ref : k_j0_refs)
        CHECK(std::fabs(bessel_j0(ref.x) - ref.value) <= 1e-10);
}

TEST_CASE("bessel_j0 branch agreement near the series/asymptotic switch") {
    // the asymptotic branch takes over above x = 12; the power series is
    // still accurate there, so the two must agree at the handoff
    for (double x : {12.0 + 1e-9, 12.5, 13.0, 14.0}) {
        const double series = bessel_j0_series(x, 80);
        CHECK(std::fabs(bessel_j0(x) - series) <= 1e-11);
    }
}

TEST_CASE("bessel_j0 alternating-series truncation bound for |x| <= 8") {
    for (double x : {0.5, 2.0, 4.0, 6.0, 8.0}) {
        const double full = bessel_j0_series(x, 60);
        const double q = 0.25 * x * x;
        for (int k : {20, 25, 30}) {
            double term = 1.0; // magnitude of the first omitted term
            for (int i = 1; i <= k; ++i)
                term *= q / ((double)i * (double)i);
            const double partial = bessel_j0_series(x, k);
            CHECK(std::fabs(partial - full) <= term + 1e-18);
        }
    }
}

TEST_CASE("bessel_j0 rejects non-finite input") {
    CHECK_THROWS_AS(bessel_j0(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
    CHECK_THROWS_AS(bessel_j0(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("sym_eig trivial spectra") {
    const EigenDecomposition id3 = sym_eig(SymmetricMatrix::identity(3));
    for (double v : id3.values)
        CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

    SymmetricMatrix d(3);
    d.set(0, 0, 5.0);
    d.set(1, 1, 2.0);
    d.set(2, 2, -1.0);
    const EigenDecomposition e = sym_eig(d);
    CHECK(e.values[0] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(e.values[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(e.values[2] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("sym_eig 2x2 closed form (M=2, W=0.5 correlation)") {
    const SymmetricMatrix a = from_rows({{1.0, -0.3042}, {-0.3042, 1.0}});
    const EigenDecomposition e = sym_eig(a);
    CHECK(std::fabs(e.values[0] - 1.3042) <= 1e-4);
    CHECK(std::fabs(e.values[1] - 0.6958) <= 1e-4);
}

TEST_CASE("sym_eig invariants on random matrices") {
    CounterRng rng(101);
    for (int n : {2, 3, 5, 8, 13, 16}) {
        const SymmetricMatrix a = random_symmetric(n, rng);
        const EigenDecomposition e = sym_eig(a);
        CHECK(orthonormality_error(e) <= 1e-10);
        CHECK(reconstruction_error(a, e) <= 1e-9 * std::max(a.max_abs(), 1e-30));
        CHECK(std::is_sorted(e.values.rbegin(), e.values.rend()));
    }
}

TEST_CASE("sym_eig order guard") {
    CHECK_THROWS_AS(sym_eig(SymmetricMatrix(1025)), std::invalid_argument);
}

TEST_CASE("Rayleigh quotient bounded by the extreme eigenvalues") {
    CounterRng rng(202);
    const SymmetricMatrix a = random_symmetric(8, rng);
    const EigenDecomposition e = sym_eig(a);
    const double lo = e.values.back(), hi = e.values.front();
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> x(8);
        double nn = 0.0;
        for (double &v : x) {
            v = rng.next_gaussian();
            nn += v * v;
        }
        double quad = 0.0;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                quad += x[i] * a.at(i, j) * x[j];
        const double r = quad / nn;
        CHECK(r >= lo - 1e-10);
        CHECK(r <= hi + 1e-10);
    }
}

TEST_CASE("psd_sqrt diagonal and identity") {
    const RealMatrix s1 = psd_sqrt(SymmetricMatrix::identity(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(std::fabs(s1.at(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);

    SymmetricMatrix d(2);
    d.set(0, 0, 4.0);
    d.set(1, 1, 9.0);
    const RealMatrix s2 = psd_sqrt(d);
    CHECK(s2.at(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s2.at(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(std::fabs(s2.at(0, 1)) <= 1e-14);
}

TEST_CASE("psd_sqrt reconstructs random PSD matrices") {
    CounterRng rng(303);
    for (int n : {3, 6, 10}) {
        // A = B B^T is PSD by construction
        SymmetricMatrix a(n);
        std::vector<std::vector<double>> b(n, std::vector<double>(n));
        for (auto &row : b)
            for (double &v : row)
                v = rng.next_gaussian();
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k)
                    acc += b[i][k] * b[j][k];
                a.set(i, j, acc);
            }
        const RealMatrix s = psd_sqrt(a);
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k)
                    acc += s.at(i, k) * s.at(j, k);
                worst = std::max(worst, std::fabs(acc - a.at(i, j)));
            }
        CHECK(worst <= 1e-8 * std::max(a.max_abs(), 1.0));
    }
}

TEST_CASE("psd_sqrt rejects indefinite matrices") {
    SymmetricMatrix d(2);
    d.set(0, 0, 1.0);
    d.set(1, 1, -1.0);
    CHECK_THROWS_AS(psd_sqrt(d), numeric_error);
}

TEST_CASE("leading_eigpair conventions") {
    const auto [l1, u1] = leading_eigpair(SymmetricMatrix::identity(2));
    CHECK(l1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(u1[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(u1[1]) <= 1e-12);

    SymmetricMatrix d(2);
    d.set(0, 0, 2.0);
    d.set(1, 1, 7.0);
    const auto [l2, u2] = leading_eigpair(d);
    CHECK(l2 == doctest::Approx(7.0).epsilon(1e-14));
    CHECK(std::fabs(u2[0]) <= 1e-12);
    CHECK(u2[1] == doctest::Approx(1.0).epsilon(1e-12));

    const auto [l3, u3] = leading_eigpair(from_rows({{1.0, -0.3042}, {-0.3042, 1.0}}));
    CHECK(std::fabs(l3 - 1.3042) <= 1e-4);
    CHECK(std::fabs(u3[0] - M_SQRT1_2) <= 1e-4); // first nonzero component positive
    CHECK(std::fabs(u3[1] + M_SQRT1_2) <= 1e-4);
}

TEST_CASE("leading_eigpair residual on random matrices") {
    CounterRng rng(404);
    for (int n : {4, 9}) {
        const SymmetricMatrix a = random_symmetric(n, rng);
        const auto [lam, u] = leading_eigpair(a);
        double nn = 0.0, resid = 0.0;
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                acc += a.at(i, j) * u[j];
            resid = std::max(resid, std::fabs(acc - lam * u[i]));
            nn += u[i] * u[i];
        }
        CHECK(std::fabs(nn - 1.0) <= 1e-12);
        CHECK(resid <= 1e-9);
    }
}
