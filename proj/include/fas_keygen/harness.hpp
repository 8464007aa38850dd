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

#ifndef FAS_KEYGEN_HARNESS_HPP
#define FAS_KEYGEN_HARNESS_HPP

#include <string>
#include <vector>

#include "fas_keygen/ports.hpp"

namespace faskeygen {

double dbm_to_watts(double dbm);
double db_to_linear(double db);

// Parses the documented JSON schema (schema version 1). Missing fields take
// the default parameter table; unknown fields are hard errors.
SystemConfig load_config(const std::string &path);
SystemConfig parse_config(const std::string &json_text);

enum class SweepVariable { P_A_dBm, N, M, W };

std::string sweep_variable_name(SweepVariable v);

struct SweepSpec {
    SweepVariable variable = SweepVariable::P_A_dBm;
    std::vector<double> grid;
    std::vector<Method> methods;
    Scenario scenario = Scenario::iid;
    int trials = 100;
    SystemConfig base;
};

SweepSpec load_sweep_spec(const std::string &path);
SweepSpec parse_sweep_spec(const std::string &json_text);

struct SweepRow {
    double variable_value = 0.0;
    std::string method;
    std::string scenario;
    double kgr_bits = 0.0;
    double objective_t = 0.0;
    int iterations = 0;
    double wall_ms = 0.0;
};

// Runs every (grid value x method) cell, averaging the KGR over `trials`
// eavesdropper placements. Trial k draws its randomness from seed+k for
// every cell, so trend comparisons across grid values and methods share
// common random numbers and the result is independent of scheduling.
// threads <= 0 means FAS_KEYGEN_THREADS or hardware concurrency. Per-cell
// failures are recorded in the row (kgr_bits = NaN, iterations = -1).
std::vector<SweepRow> run_sweep(const SweepSpec &spec, int threads = 0);

enum class EmitFormat { csv, json };

// CSV header: variable,method,scenario,kgr_bits,objective_t,iterations,wall_ms
// Numbers are emitted in full-precision scientific notation, LF line ends.
void emit(const std::vector<SweepRow> &rows, EmitFormat format, const std::string &path);

std::string rows_to_csv(const std::vector<SweepRow> &rows);
std::string rows_to_json(const std::vector<SweepRow> &rows);
std::vector<SweepRow> parse_csv_rows(const std::string &text);

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Closed-form/oracle equivalence over randomized instances plus the
// Monte-Carlo agreement checks on the default configuration.
std::vector<ValidationCheck> run_validation(const SystemConfig &config);

int thread_count_from_env();

} // namespace faskeygen

#endif
