// Command-line front end: scenario runner, stage commands, and plot-data
// emission. All file output is deterministic except the timing block.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rmp/errors.hpp"
#include "rmp/scenario.hpp"

namespace fs = std::filesystem;
using namespace rmp;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Scenario load_scenario(const std::string& ref) {
    if (const Scenario* sc = find_scenario(ref)) return *sc;
    if (!fs::exists(ref))
        throw ConfigError("unknown scenario '" + ref + "' (not bundled, not a config file)");
    return scenario_from_config(parse_config_file(ref));
}

fs::path output_root(const std::string& out_flag) {
    if (!out_flag.empty()) return out_flag;
    if (const char* env = std::getenv("RMP_OUTPUT_ROOT"); env && *env) return env;
    return "rmp-out";
}

// One row per accepted iterate of the dual descent.
void write_iterations_csv(const fs::path& file, const SolveOutcome& o) {
    std::ofstream out(file, std::ios::binary);
    out << "iter,objective,grad_norm,step,min_q,max_q\n";
    for (const IterRecord& r : o.trace)
        out << r.iter << ',' << num(r.objective) << ',' << num(r.grad_norm) << ','
            << num(r.step) << ',' << num(r.min_q) << ',' << num(r.max_q) << '\n';
}

void write_atoms_csv(const fs::path& file, int dim, const AtomicPart* atoms) {
    std::ofstream out(file, std::ios::binary);
    for (int a = 0; a < dim; ++a) out << 'x' << a << ',';
    out << "weight\n";
    if (!atoms) return;
    for (std::size_t i = 0; i < atoms->points.size(); ++i) {
        for (double xi : atoms->points[i]) out << num(xi) << ',';
        out << num(atoms->weights[i]) << '\n';
    }
}

// 1d slice through K along `axis`; the other coordinates are pinned to
// `fixed` (in axis order). Columns: x, P(x), Q_hat(x), P/Q_hat.
void write_slice(std::ostream& out, const BasisSystem& basis, const Eigen::VectorXd& p,
                 const SolveOutcome& outcome, const AtomicPart* atoms, int axis,
                 const std::vector<double>& fixed, int samples) {
    const DomainBox& box = basis.box();
    const int d = box.dim;
    if (axis < 0 || axis >= d) throw DomainError("slice axis out of range");
    if (static_cast<int>(fixed.size()) != d - 1)
        throw DomainError("slice needs one fixed coordinate per remaining axis");

    std::vector<double> x(static_cast<std::size_t>(d));
    {
        int k = 0;
        for (int a = 0; a < d; ++a) {
            if (a == axis) continue;
            x[static_cast<std::size_t>(a)] = fixed[static_cast<std::size_t>(k++)];
        }
        x[static_cast<std::size_t>(axis)] = box.bounds[static_cast<std::size_t>(axis)].first;
        if (!box.contains(x.data(), 1e-12)) throw DomainError("slice lies outside the domain");
    }

    const auto [lo, hi] = box.bounds[static_cast<std::size_t>(axis)];
    std::vector<double> alpha(static_cast<std::size_t>(basis.size()));
    out << "x,P,Q,ratio\n";
    for (int i = 0; i < samples; ++i) {
        const double xi = lo + (i + 0.5) * (hi - lo) / samples;
        x[static_cast<std::size_t>(axis)] = xi;
        basis.evaluate(x.data(), alpha.data());
        double P = 0.0, Q = 0.0;
        for (int k = 0; k < basis.size(); ++k) {
            P += p[k] * alpha[static_cast<std::size_t>(k)];
            Q += outcome.q_hat.v[k] * alpha[static_cast<std::size_t>(k)];
        }
        out << num(xi) << ',' << num(P) << ',' << num(Q) << ',' << num(P / Q) << '\n';
    }
    out << "\n# atoms\n";
    for (int a = 0; a < d; ++a) out << 'x' << a << ',';
    out << "weight\n";
    if (atoms)
        for (std::size_t i = 0; i < atoms->points.size(); ++i) {
            for (double xi : atoms->points[i]) out << num(xi) << ',';
            out << num(atoms->weights[i]) << '\n';
        }
}

std::vector<double> default_fixed(const DomainBox& box, int axis) {
    std::vector<double> fixed;
    for (int a = 0; a < box.dim; ++a)
        if (a != axis)
            fixed.push_back(0.5 * (box.bounds[static_cast<std::size_t>(a)].first +
                                   box.bounds[static_cast<std::size_t>(a)].second));
    return fixed;
}

void write_artifacts(const fs::path& dir, const Scenario& sc, const RunReport& rep) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "report.txt", std::ios::binary);
        out << render_report(rep);
    }
    if (!rep.outcome) return;
    write_iterations_csv(dir / "iterations.csv", *rep.outcome);

    std::shared_ptr<BasisSystem> basis = sc.make_basis(sc.resolution);
    write_atoms_csv(dir / "atoms.csv", basis->dim(),
                    rep.atoms && !rep.atoms->points.empty() ? &*rep.atoms : nullptr);
    try {
        std::ofstream out(dir / "plotdata.csv", std::ios::binary);
        write_slice(out, *basis, sc.p, *rep.outcome,
                    rep.atoms && !rep.atoms->points.empty() ? &*rep.atoms : nullptr, 0,
                    default_fixed(basis->box(), 0), 256);
    } catch (const std::exception& e) {
        std::ofstream out(dir / "plotdata.csv", std::ios::binary);
        out << "# slice unavailable: " << e.what() << '\n';
    }
}

// Exit code for a finished report: 2 if the pipeline errored out, 1 if a
// check failed, 0 otherwise.
int report_code(const RunReport& rep) {
    if (rep.doc.find("error")) return 2;
    return rep.pass ? 0 : 1;
}

int cmd_run(const std::vector<std::string>& refs, const std::string& out_flag, int jobs) {
    std::vector<Scenario> scenarios;
    if (refs.size() == 1 && refs.front() == "all") {
        for (const Scenario& sc : bundled_scenarios()) scenarios.push_back(sc);
    } else {
        for (const std::string& ref : refs) scenarios.push_back(load_scenario(ref));
    }

    const bool single = scenarios.size() == 1;
    const fs::path root = output_root(out_flag);
    std::vector<RunReport> reports(scenarios.size());

    auto run_one = [&](std::size_t i) {
        const fs::path dir = (single && !out_flag.empty()) ? root : root / scenarios[i].name;
        reports[i] = run_scenario(scenarios[i]);
        write_artifacts(dir, scenarios[i], reports[i]);
    };

    if (jobs <= 1 || scenarios.size() == 1) {
        for (std::size_t i = 0; i < scenarios.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(jobs),
                                                        scenarios.size());
        pool.reserve(width);
        for (std::size_t w = 0; w < width; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < scenarios.size();
                     i = next.fetch_add(1))
                    run_one(i);
            });
        for (std::thread& th : pool) th.join();
    }

    int code = 0;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (single) std::cout << render_report(reports[i]);
        char line[160];
        std::snprintf(line, sizeof line, "[%s] %-8s (%.2fs)\n",
                      report_code(reports[i]) == 0 ? "PASS" : "FAIL",
                      scenarios[i].name.c_str(), reports[i].seconds);
        std::cout << line;
        code = std::max(code, report_code(reports[i]));
    }
    return code;
}

// Stage commands reuse the scenario runner with the other stages switched
// off; checks are dropped because a stage on its own has nothing to grade.
int cmd_stage(const std::string& ref, bool classify, bool solve, bool atoms, bool duality,
              const std::string& out_flag, bool write_files) {
    Scenario sc = load_scenario(ref);
    sc.run_classify = classify;
    sc.run_solve = solve;
    sc.run_atoms = atoms;
    sc.run_duality = duality;
    sc.checks.clear();
    sc.extra = nullptr;

    RunReport rep = run_scenario(sc);
    std::cout << render_report(rep);
    if (write_files && rep.outcome) {
        const fs::path dir = !out_flag.empty() ? fs::path(out_flag)
                                               : output_root("") / sc.name;
        fs::create_directories(dir);
        write_iterations_csv(dir / "iterations.csv", *rep.outcome);
        if (atoms) {
            std::shared_ptr<BasisSystem> basis = sc.make_basis(sc.resolution);
            write_atoms_csv(dir / "atoms.csv", basis->dim(),
                            rep.atoms && !rep.atoms->points.empty() ? &*rep.atoms : nullptr);
        }
    }
    return rep.doc.find("error") ? 2 : 0;
}

int cmd_report(const std::string& ref) {
    RunReport rep = run_scenario(load_scenario(ref));
    std::cout << render_report(rep);
    return report_code(rep);
}

int cmd_list() {
    for (const Scenario& sc : bundled_scenarios()) {
        std::cout << sc.name << "  " << sc.summary;
        if (!sc.notes.empty()) {
            std::cout << " (";
            for (std::size_t i = 0; i < sc.notes.size(); ++i)
                std::cout << (i ? "; " : "") << sc.notes[i];
            std::cout << ')';
        }
        std::cout << '\n';
    }
    return 0;
}

int cmd_plotdata(const std::string& ref, int axis, std::vector<double> fixed, int samples,
                 const std::string& out_flag) {
    Scenario sc = load_scenario(ref);
    sc.run_classify = false;
    sc.run_solve = true;
    sc.run_atoms = true;
    sc.run_duality = false;
    sc.checks.clear();
    sc.extra = nullptr;

    RunReport rep = run_scenario(sc);
    if (const ConfigValue* err = rep.doc.find("error"))
        throw DomainError("scenario failed before plotting: " + err->as_string());
    if (!rep.outcome || !rep.outcome->converged)
        throw DomainError("plot data needs a converged solve");

    std::shared_ptr<BasisSystem> basis = sc.make_basis(sc.resolution);
    if (fixed.empty() && basis->dim() > 1) fixed = default_fixed(basis->box(), axis);

    std::ostringstream buf;
    write_slice(buf, *basis, sc.p, *rep.outcome,
                rep.atoms && !rep.atoms->points.empty() ? &*rep.atoms : nullptr, axis, fixed,
                samples);
    if (out_flag == "-") {
        std::cout << buf.str();
    } else {
        const fs::path file = !out_flag.empty() ? fs::path(out_flag)
                                                : output_root("") / sc.name / "plotdata.csv";
        fs::create_directories(file.parent_path());
        std::ofstream out(file, std::ios::binary);
        out << buf.str();
        std::cout << "wrote " << file.string() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"truncated moment problem toolkit: rational measures with singular parts"};
    app.require_subcommand(1);

    std::string ref, out_flag;
    std::vector<std::string> refs;
    int jobs = 1, axis = 0, samples = 256;
    std::vector<double> fixed;

    CLI::App* c_list = app.add_subcommand("list", "show the bundled scenarios");

    CLI::App* c_run = app.add_subcommand("run", "full pipeline with checks and artifacts");
    c_run->add_option("scenario", refs, "bundled name, config path, or 'all'")->required();
    c_run->add_option("--out", out_flag, "output directory (default $RMP_OUTPUT_ROOT or ./rmp-out)");
    c_run->add_option("--jobs", jobs, "run scenarios in parallel")->check(CLI::PositiveNumber);

    CLI::App* c_classify = app.add_subcommand("classify", "dual-cone membership of the moment vector");
    c_classify->add_option("scenario", ref, "bundled name or config path")->required();

    CLI::App* c_solve = app.add_subcommand("solve", "minimize the dual functional");
    c_solve->add_option("scenario", ref, "bundled name or config path")->required();
    c_solve->add_option("--out", out_flag, "directory for iterations.csv");

    CLI::App* c_atoms = app.add_subcommand("atoms", "solve and recover the singular part");
    c_atoms->add_option("scenario", ref, "bundled name or config path")->required();
    c_atoms->add_option("--out", out_flag, "directory for atoms.csv");

    CLI::App* c_report = app.add_subcommand("report", "full pipeline, report to stdout");
    c_report->add_option("scenario", ref, "bundled name or config path")->required();

    CLI::App* c_plot = app.add_subcommand("emit-plotdata", "CSV slice of (x, P, Q, P/Q)");
    c_plot->add_option("scenario", ref, "bundled name or config path")->required();
    c_plot->add_option("--axis", axis, "axis the slice runs along");
    c_plot->add_option("--at", fixed, "fixed coordinates for the other axes");
    c_plot->add_option("--samples", samples, "sample count")->check(CLI::PositiveNumber);
    c_plot->add_option("--out", out_flag, "output file, or - for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (c_list->parsed()) return cmd_list();
        if (c_run->parsed()) return cmd_run(refs, out_flag, jobs);
        if (c_classify->parsed()) return cmd_stage(ref, true, false, false, false, "", false);
        if (c_solve->parsed()) return cmd_stage(ref, false, true, false, false, out_flag, true);
        if (c_atoms->parsed()) return cmd_stage(ref, false, true, true, false, out_flag, true);
        if (c_report->parsed()) return cmd_report(ref);
        if (c_plot->parsed()) return cmd_plotdata(ref, axis, fixed, samples, out_flag);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
