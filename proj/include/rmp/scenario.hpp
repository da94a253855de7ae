#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmp/config.hpp"
#include "rmp/cones.hpp"
#include "rmp/primal.hpp"
#include "rmp/recovery.hpp"
#include "rmp/solver.hpp"
#include "rmp/tableau.hpp"

namespace rmp {

// Declarative expectation evaluated against the run results. `field` names
// the probe (see evaluate_check in scenario.cpp); numeric targets compare
// within `tol`.
struct ScenarioCheck {
    std::string field;
    std::vector<double> want_vec;
    double want_num = 0.0;
    std::string want_str;
    double tol = 1e-6;
};

struct ScenarioAtomSpec {
    std::vector<double> point;
    double weight = 0.0;
};

// A reproducible problem instance: basis and grid, a moment source (explicit
// vector, or the forward map of a (p, q) pair plus optional atoms), solver
// settings, and the expected results.
struct Scenario {
    std::string name;
    std::string summary;
    std::vector<std::string> notes;

    std::function<std::shared_ptr<BasisSystem>(const std::vector<int>&)> make_basis;
    std::vector<int> resolution;
    QuadRule rule = QuadRule::Midpoint;

    bool has_explicit_c = false;
    Eigen::VectorXd c_explicit;
    Eigen::VectorXd p;
    Eigen::VectorXd q_forward;  // used when nonempty
    std::vector<ScenarioAtomSpec> atoms_forward;

    SolverOptions solver;
    bool run_classify = true;
    bool run_solve = true;
    bool run_atoms = true;
    bool run_duality = true;

    std::vector<ScenarioCheck> checks;

    // Scenario-specific stage: may append report entries and extra
    // pass/fail rows (name, passed).
    std::function<void(const Scenario&, const GridTableau&, ConfigBlock&,
                       std::vector<std::pair<std::string, bool>>&)>
        extra;
};

struct RunReport {
    std::string scenario;
    bool pass = true;
    double seconds = 0.0;
    ConfigBlock doc;  // deterministic document; the timing block is appended last

    // Raw results for artifact emission (iteration CSV, atom CSV, plot data).
    std::optional<SolveOutcome> outcome;
    std::optional<AtomicPart> atoms;
};

// The built-in library behind `run <name>` and `list`.
const std::vector<Scenario>& bundled_scenarios();
const Scenario* find_scenario(const std::string& name);

// Executes classify -> solve -> atoms -> duality as enabled, evaluates the
// checks, and assembles the report document.
RunReport run_scenario(const Scenario& sc);

// Scenario from a parsed config file (top-level `scenario` block). The
// tabulated basis family is not expressible here; use a bundled scenario.
Scenario scenario_from_config(const ConfigBlock& root);

std::string render_report(const RunReport& report);

}  // namespace rmp
