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

#ifndef FAS_KEYGEN_PORTS_HPP
#define FAS_KEYGEN_PORTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fas_keygen/optimizer.hpp"

namespace faskeygen {

enum class Method { reweighted, sliding_window, sliding_window_no_opt, traverse, fa_opt, fa_mrc };

std::string method_name(Method m);
Method method_from_name(const std::string &name);

// Everything a selection strategy needs about one scenario instance.
struct MethodContext {
    const SpatialCorrelation *corr = nullptr;
    LinkBudget budget;
    double P_A = 0.0;
    double P_B = 0.0;
    double sigma2 = 0.0;
    double rho = 1.0;
    int N = 0;
    double eps0 = 1e-4;
    double gamma_reg = 0.0;
    std::uint64_t seed = 1;
    int threads = 1;

    KgrModel model() const;
};

MethodContext make_context(const SystemConfig &config, const SpatialCorrelation &corr,
                           const LinkBudget &budget);

// Chosen ports (1-based, sorted), the resulting beamformer, its correlation
// objective t = w^H J w and the scenario KGR.
struct SelectionResult {
    Method method = Method::traverse;
    std::vector<int> indices;
    Beamformer w;
    double objective_t = 0.0;
    KgrResult kgr;
    bool converged = true;
    int iterations = 0;
};

// V_m = 1 / (|w_m| + gamma)
std::vector<double> reweight(const Beamformer &w_prev, double gamma_reg);

// Outer reweighting loop: alternate the SCA solve with V <- g(w) until the
// objective stalls, then keep the N largest-magnitude ports and re-optimize
// on that fixed support.
SelectionResult reweighted_solve(ProblemKind kind, const MethodContext &ctx);

struct SlidingWindowInit {
    Beamformer w;              // masked leading eigenvector, power-normalized
    std::vector<int> indices;  // 0-based contiguous window
    double raw_score = 0.0;    // w^H J w of the unnormalized masked vector
};

// Scores all M-N+1 contiguous windows by masking the leading eigenvector and
// keeps the argmax (ties toward the lowest start index).
SlidingWindowInit sliding_window_init(const SpatialCorrelation &corr, int N, double P_A);

// Algorithm-3 initialization followed by the restricted SCA solve on the
// winning window (no l1 constraint; the support is fixed).
SelectionResult sliding_window_solve(ProblemKind kind, const MethodContext &ctx);

// Initialization only, no beamforming optimization inside the window.
SelectionResult sliding_window_no_opt(ProblemKind kind, const MethodContext &ctx);

// Exhaustive subset search. For a fixed support both objectives increase
// with t = w^H J w, so the per-subset optimum is the restricted Rayleigh
// maximizer sqrt(P_A) * u_max(J[S,S]); the subset with the best KGR wins,
// ties resolved toward the lexicographically smallest subset. Refuses
// instances with more than 10^7 subsets.
SelectionResult traverse(ProblemKind kind, const MethodContext &ctx);

// Number of subsets the traversal would enumerate.
double traverse_subset_count(int M, int N);

// Fixed-antenna baseline: N ports on a uniform grid over the aperture
// (nearest-integer spacing), beamformer optimized on that fixed support.
SelectionResult fa_opt_baseline(ProblemKind kind, const MethodContext &ctx);

std::vector<int> fa_uniform_ports(int M, int N); // 0-based

// Fixed-antenna MRC baseline: per channel draw the beamformer is the
// conjugate restricted channel at full power; the closed-form KGR is
// averaged over the draws.
SelectionResult fa_mrc_baseline(ProblemKind kind, const MethodContext &ctx, int draws = 10000);

SelectionResult run_method(Method method, ProblemKind kind, const MethodContext &ctx);

} // namespace faskeygen

#endif
