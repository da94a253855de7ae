#include "rmp/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "rmp/errors.hpp"
#include "rmp/quadrature.hpp"

namespace rmp {
namespace {

constexpr double kPi = std::numbers::pi;

std::string uniqueness_name(Uniqueness u) {
    switch (u) {
        case Uniqueness::Unique: return "unique";
        case Uniqueness::NonUnique: return "non-unique";
        case Uniqueness::Undetermined: return "undetermined";
    }
    return "unknown";
}

std::string zero_kind_name(const ZeroSet& z) {
    if (z.points.empty()) return "empty";
    return z.kind == SupportKind::SampledCurve ? "curve" : "points";
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

ConfigValue vec_value(const Eigen::VectorXd& v) {
    std::vector<ConfigValue> items;
    items.reserve(static_cast<std::size_t>(v.size()));
    for (int i = 0; i < v.size(); ++i) items.push_back(ConfigValue::number(v[i]));
    return ConfigValue::list(std::move(items));
}

ConfigValue point_value(const std::vector<double>& x) {
    std::vector<ConfigValue> items;
    items.reserve(x.size());
    for (double xi : x) items.push_back(ConfigValue::number(xi));
    return ConfigValue::list(std::move(items));
}

Eigen::VectorXd to_eigen(const std::vector<double>& xs) {
    Eigen::VectorXd v(static_cast<int>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<int>(i)] = xs[i];
    return v;
}

// Everything the checks can probe.
struct RunState {
    bool have_classify = false;
    ConeReport classify;
    bool have_outcome = false;
    SolveOutcome outcome;
    bool have_atoms = false;
    AtomicPart atoms;
    std::string atoms_error;
    bool have_gap = false;
    double gap = 0.0;
};

std::pair<bool, std::string> evaluate_check(const ScenarioCheck& ck, const RunState& st) {
    auto vec_err = [&](const Eigen::VectorXd& got) -> std::pair<bool, std::string> {
        if (got.size() != static_cast<int>(ck.want_vec.size()))
            return {false, "size mismatch"};
        double err = 0.0;
        for (int i = 0; i < got.size(); ++i)
            err = std::max(err, std::fabs(got[i] - ck.want_vec[static_cast<std::size_t>(i)]));
        return {err <= ck.tol, fmt("max err %.3e (tol %.3e)", err, ck.tol)};
    };
    auto bound = [&](double value) -> std::pair<bool, std::string> {
        return {std::fabs(value) <= ck.tol, fmt("|%.3e| vs tol %.3e", value, ck.tol)};
    };

    if (ck.field == "region") {
        if (!st.have_classify) return {false, "classification not run"};
        std::string got = region_name(st.classify.region);
        return {got == ck.want_str, "got " + got};
    }
    if (!st.have_outcome && ck.field != "atom_count")
        if (ck.field == "boundary" || ck.field == "converged" || ck.field == "q_hat" ||
            ck.field == "c_hat" || ck.field == "slackness_abs" || ck.field == "zero_kind" ||
            ck.field == "duality_gap")
            return {false, "solve not run"};
    if (ck.field == "boundary")
        return {st.outcome.boundary == (ck.want_num != 0.0),
                std::string("got ") + (st.outcome.boundary ? "true" : "false")};
    if (ck.field == "converged")
        return {st.outcome.converged == (ck.want_num != 0.0),
                std::string("got ") + (st.outcome.converged ? "true" : "false")};
    if (ck.field == "q_hat") return vec_err(st.outcome.q_hat.v);
    if (ck.field == "c_hat") return vec_err(st.outcome.gradient_residual.v);
    if (ck.field == "slackness_abs") return bound(st.outcome.kkt.slackness);
    if (ck.field == "zero_kind") {
        std::string got = zero_kind_name(st.outcome.zero_set);
        return {got == ck.want_str, "got " + got};
    }
    if (ck.field == "duality_gap") {
        if (!st.have_gap) return {false, "duality stage not run"};
        return {st.gap <= ck.tol, fmt("gap %.3e (tol %.3e)", st.gap, ck.tol)};
    }
    if (ck.field.rfind("atom_", 0) == 0) {
        if (!st.atoms_error.empty()) return {false, "recovery failed: " + st.atoms_error};
        if (!st.have_atoms) return {false, "atom stage not run"};
        const auto& at = st.atoms;
        double total = 0.0;
        for (double w : at.weights) total += w;
        if (ck.field == "atom_count")
            return {static_cast<double>(at.points.size()) == ck.want_num,
                    "got " + std::to_string(at.points.size())};
        if (ck.field == "atom_count_max")
            return {static_cast<double>(at.points.size()) <= ck.want_num,
                    "got " + std::to_string(at.points.size())};
        if (ck.field == "atom_total_mass")
            return {std::fabs(total - ck.want_num) <= ck.tol,
                    fmt("mass %.6f (tol %.3e)", total, ck.tol)};
        if (ck.field == "atom_axis_moment") {
            if (ck.want_vec.size() != 2) return {false, "expected [axis, target]"};
            int axis = static_cast<int>(ck.want_vec[0]);
            double m = 0.0;
            for (std::size_t i = 0; i < at.points.size(); ++i)
                m += at.weights[i] * at.points[i][static_cast<std::size_t>(axis)];
            return {std::fabs(m - ck.want_vec[1]) <= ck.tol,
                    fmt("moment %.6f (tol %.3e)", m, ck.tol)};
        }
        if (ck.field == "atom_uniqueness") {
            std::string got = uniqueness_name(at.uniqueness);
            return {got == ck.want_str, "got " + got};
        }
        if (ck.field == "atom_residual") return bound(at.residual);
    }
    return {false, "unknown check field '" + ck.field + "'"};
}

void fill_tableau_block(ConfigBlock& doc, const GridTableau& t) {
    ConfigBlock& b = doc.add_block("tableau");
    b.set("family", ConfigValue::string(family_name(t.basis->family())));
    b.set("n", ConfigValue::integer(t.n));
    b.set("dim", ConfigValue::integer(t.dim()));
    {
        std::vector<ConfigValue> res;
        for (int r : t.resolution) res.push_back(ConfigValue::integer(r));
        b.set("resolution", ConfigValue::list(std::move(res)));
    }
    b.set("rule", ConfigValue::string(t.rule == QuadRule::Midpoint ? "midpoint"
                                                                   : "gauss-legendre"));
    b.set("nodes", ConfigValue::integer(static_cast<long>(t.node_count)));
    b.set("measure_total", ConfigValue::number(t.measure_total));
}

void fill_solve_block(ConfigBlock& doc, const SolveOutcome& o) {
    ConfigBlock& b = doc.add_block("solve");
    b.set("converged", ConfigValue::boolean(o.converged));
    b.set("boundary", ConfigValue::boolean(o.boundary));
    b.set("polished", ConfigValue::boolean(o.polished));
    b.set("split_residual", ConfigValue::boolean(o.split_residual));
    b.set("iterations", ConfigValue::integer(o.iterations));
    b.set("objective", ConfigValue::number(o.objective_value));
    b.set("gradient_norm", ConfigValue::number(o.gradient_norm));
    b.set("q_hat", vec_value(o.q_hat.v));
    b.set("residual", vec_value(o.gradient_residual.v));
    b.set("slackness", ConfigValue::number(o.kkt.slackness));
    for (const std::string& w : o.warnings) b.set("warning", ConfigValue::string(w));
    ConfigBlock& z = b.add_block("zero_set");
    z.set("kind", ConfigValue::string(zero_kind_name(o.zero_set)));
    z.set("count", ConfigValue::integer(static_cast<long>(o.zero_set.points.size())));
    z.set("flagged_cells", ConfigValue::integer(static_cast<long>(o.zero_set.flagged_cells)));
    const std::size_t cap = std::min<std::size_t>(o.zero_set.points.size(), 12);
    for (std::size_t i = 0; i < cap; ++i)
        z.set("point", point_value(o.zero_set.points[i]));
    if (o.zero_set.points.size() > cap)
        z.set("points_omitted",
              ConfigValue::integer(static_cast<long>(o.zero_set.points.size() - cap)));
}

}  // namespace

RunReport run_scenario(const Scenario& sc) {
    const auto t_start = std::chrono::steady_clock::now();
    RunReport rep;
    rep.scenario = sc.name;

    ConfigBlock& doc = rep.doc;
    {
        ConfigBlock& head = doc.add_block("scenario");
        head.set("name", ConfigValue::string(sc.name));
        head.set("version", ConfigValue::string("0.1.0"));
        head.set("summary", ConfigValue::string(sc.summary));
        for (const std::string& note : sc.notes) head.set("note", ConfigValue::string(note));
    }

    std::vector<std::pair<std::string, bool>> results;
    RunState st;

    try {
        std::shared_ptr<BasisSystem> basis = sc.make_basis(sc.resolution);
        GridTableau t = build_tableau(basis, sc.resolution, sc.rule);
        fill_tableau_block(doc, t);

        Eigen::VectorXd c;
        std::string source = "explicit";
        if (sc.has_explicit_c) {
            c = sc.c_explicit;
        } else if (sc.q_forward.size() > 0) {
            QuadratureOptions qo;
            qo.allow_refinement = false;  // grid-consistent forward construction
            c = moment_map(t, CoefVector(sc.p), CoefVector(sc.q_forward), qo).v;
            source = "forward";
            if (!sc.atoms_forward.empty()) {
                source = "forward-plus-atoms";
                std::vector<double> alpha(static_cast<std::size_t>(t.n));
                for (const ScenarioAtomSpec& a : sc.atoms_forward) {
                    t.basis->evaluate(a.point.data(), alpha.data());
                    for (int k = 0; k < t.n; ++k) c[k] += a.weight * alpha[static_cast<std::size_t>(k)];
                }
            }
        } else if (sc.run_solve || sc.run_classify) {
            throw ConfigError("scenario '" + sc.name + "' has no moment source");
        }

        if (c.size() > 0) {
            ConfigBlock& m = doc.add_block("moments");
            m.set("source", ConfigValue::string(source));
            m.set("c", vec_value(c));
        }

        if (sc.run_classify) {
            st.classify = classify_moment(t, MomentVector(c));
            st.have_classify = true;
            ConfigBlock& b = doc.add_block("classify");
            b.set("region", ConfigValue::string(region_name(st.classify.region)));
            b.set("value", ConfigValue::number(st.classify.value));
            b.set("lp_iterations", ConfigValue::integer(st.classify.lp_iterations));
            b.set("exchange_rounds", ConfigValue::integer(st.classify.rounds));
            if (st.classify.region == ConeRegion::Exterior && st.classify.witness.size() > 0)
                b.set("witness", vec_value(st.classify.witness.v));
        }

        if (sc.run_solve) {
            st.outcome = solve_dual(t, MomentVector(c), CoefVector(sc.p), sc.solver);
            st.have_outcome = true;
            fill_solve_block(doc, st.outcome);
        }

        if (sc.run_atoms && st.have_outcome) {
            ConfigBlock& b = doc.add_block("atoms");
            if (!st.outcome.boundary) {
                st.have_atoms = true;  // interior: empty by definition
                b.set("count", ConfigValue::integer(0));
                b.set("total_mass", ConfigValue::number(0.0));
            } else {
                try {
                    st.atoms = recover_atoms(t, st.outcome.gradient_residual, st.outcome.zero_set);
                    st.have_atoms = true;
                    double total = 0.0;
                    for (double w : st.atoms.weights) total += w;
                    b.set("count", ConfigValue::integer(static_cast<long>(st.atoms.points.size())));
                    b.set("total_mass", ConfigValue::number(total));
                    b.set("residual", ConfigValue::number(st.atoms.residual));
                    b.set("uniqueness", ConfigValue::string(uniqueness_name(st.atoms.uniqueness)));
                    for (std::size_t i = 0; i < st.atoms.points.size(); ++i) {
                        ConfigBlock& row = b.add_block("atom");
                        row.set("point", point_value(st.atoms.points[i]));
                        row.set("weight", ConfigValue::number(st.atoms.weights[i]));
                    }
                } catch (const RecoveryError& e) {
                    st.atoms_error = e.what();
                    b.set("error", ConfigValue::string(e.what()));
                }
            }
        }

        if (sc.run_duality && st.have_outcome && st.outcome.converged) {
            DensityOnGrid density;
            density.values.resize(t.node_count, 0.0);
            std::vector<double> P(t.node_count), Q(t.node_count);
            t.eval_poly(sc.p, P.data(), kernels::scalar_ops());
            t.eval_poly(st.outcome.q_hat.v, Q.data(), kernels::scalar_ops());
            for (std::size_t j = 0; j < t.node_count; ++j)
                density.values[j] = (P[j] != 0.0 && Q[j] > 0.0) ? P[j] / Q[j] : 0.0;
            if (st.have_atoms && !st.atoms.points.empty()) density.singular = st.atoms;

            st.gap = duality_gap(t, MomentVector(c), CoefVector(sc.p), st.outcome);
            st.have_gap = true;
            ConfigBlock& b = doc.add_block("duality");
            b.set("primal", ConfigValue::number(primal_objective(t, CoefVector(sc.p), density)));
            b.set("dual", ConfigValue::number(st.outcome.objective_value));
            b.set("gap", ConfigValue::number(st.gap));
            b.set("kl", ConfigValue::number(kl_divergence(t, CoefVector(sc.p), density)));
            const Eigen::VectorXd dm = density_moments(t, density).v;
            b.set("feasibility_residual",
                  ConfigValue::number((dm - c).lpNorm<Eigen::Infinity>()));
        }

        if (sc.extra) sc.extra(sc, t, doc, results);

        if (st.have_outcome) rep.outcome = st.outcome;
        if (st.have_atoms) rep.atoms = st.atoms;
    } catch (const std::exception& e) {
        doc.set("error", ConfigValue::string(e.what()));
        rep.pass = false;
    }

    {
        ConfigBlock& b = doc.add_block("checks");
        for (const ScenarioCheck& ck : sc.checks) {
            auto [ok, detail] = evaluate_check(ck, st);
            results.emplace_back(ck.field, ok);
            b.set(ck.field, ConfigValue::string((ok ? "pass: " : "FAIL: ") + detail));
        }
        for (const auto& [name, ok] : results)
            if (std::none_of(sc.checks.begin(), sc.checks.end(),
                             [&](const ScenarioCheck& ck) { return ck.field == name; }))
                b.set(name, ConfigValue::string(ok ? "pass" : "FAIL"));
        for (const auto& [name, ok] : results) rep.pass = rep.pass && ok;
        b.set("overall", ConfigValue::string(rep.pass ? "pass" : "fail"));
    }

    rep.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    ConfigBlock& tb = doc.add_block("timing");
    tb.set("seconds", ConfigValue::number(rep.seconds));
    return rep;
}

std::string render_report(const RunReport& report) { return emit_config(report.doc); }

namespace {

std::shared_ptr<BasisSystem> shared_basis(BasisSystem&& b) {
    return std::make_shared<BasisSystem>(std::move(b));
}

Scenario make_e1() {
    Scenario sc;
    sc.name = "e1";
    sc.summary = "interior trigonometric recovery on the circle; flat denominator (1, 0)";
    sc.make_basis = [](const std::vector<int>&) {
        DomainBox box{1, {{-kPi, kPi}}, true};
        return shared_basis(BasisSystem::cosine(box, {{0}, {1}}));
    };
    sc.resolution = {2048};
    sc.has_explicit_c = true;
    sc.c_explicit = to_eigen({1.0, -0.5});
    sc.p = to_eigen({1.0, -1.0});
    sc.checks = {
        {"region", {}, 0, "interior", 0},
        {"converged", {}, 1, "", 0},
        {"boundary", {}, 0, "", 0},
        {"q_hat", {1.0, 0.0}, 0, "", 1e-5},
        {"zero_kind", {}, 0, "empty", 0},
        {"atom_count", {}, 0, "", 0},
        {"duality_gap", {}, 0, "", 1e-7},
    };
    return sc;
}

Scenario make_e2() {
    Scenario sc;
    sc.name = "e2";
    sc.summary = "non-Lipschitz fractional basis: finite reciprocal integral and a "
                 "discontinuous moment map";
    sc.notes = {"probe limit 2+pi = 5.141592653589793", "singular integral target 2"};
    sc.make_basis = [](const std::vector<int>&) {
        DomainBox box{1, {{-1.0, 1.0}}, false};
        return shared_basis(BasisSystem::fractional(box, {{0, 1}, {1, 3}, {2, 3}}));
    };
    sc.resolution = {4096};
    sc.p = to_eigen({1.0, 0.0, 0.0});
    sc.run_classify = sc.run_solve = sc.run_atoms = sc.run_duality = false;
    sc.extra = [](const Scenario& s, const GridTableau& t, ConfigBlock& doc,
                  std::vector<std::pair<std::string, bool>>& results) {
        QuadratureOptions qo;
        qo.refine_depth = 14;
        const CoefVector p(s.p);
        const double singular = moment_map(t, p, CoefVector(to_eigen({0.0, 0.0, 3.0})), qo).v[0];
        ConfigBlock& fi = doc.add_block("fractional_integral");
        fi.set("value", ConfigValue::number(singular));
        fi.set("target", ConfigValue::number(2.0));
        results.emplace_back("singular_integral", std::fabs(singular - 2.0) <= 1e-3);

        const double limit = 2.0 + kPi;
        ConfigBlock& pb = doc.add_block("probe");
        bool monotone = true;
        double prev = -std::numeric_limits<double>::infinity();
        double last = 0.0;
        for (int k : {4, 8, 16, 32}) {
            const double ik = 1.0 / k;
            Eigen::VectorXd qk =
                to_eigen({3.0 * (ik * ik + ik * ik * ik * ik), 6.0 * ik, 3.0});
            last = moment_map(t, p, CoefVector(qk), qo).v[0];
            pb.set("k" + std::to_string(k), ConfigValue::number(last));
            monotone = monotone && last > prev;
            prev = last;
        }
        pb.set("limit", ConfigValue::number(limit));
        results.emplace_back("probe_monotone", monotone);
        results.emplace_back("probe_limit_within_10pct",
                             std::fabs(last - limit) <= 0.1 * limit);
    };
    return sc;
}

Scenario make_e3() {
    Scenario sc;
    sc.name = "e3";
    sc.summary = "2d monomial boundary case with cancellation; line-supported singular part";
    const double ln2 = std::log(2.0);
    sc.make_basis = [](const std::vector<int>&) {
        DomainBox box{2, {{0.0, 1.0}, {0.0, 1.0}}, false};
        return shared_basis(BasisSystem::monomial(box, {{0, 0}, {1, 0}, {0, 1}, {1, 1}}));
    };
    sc.resolution = {256, 256};
    sc.has_explicit_c = true;
    sc.c_explicit = to_eigen({1.0 + ln2, 0.5 * ln2, 1.5 - ln2, 0.5 * (1.0 - ln2)});
    sc.p = to_eigen({0.0, 1.0, 0.0, 0.0});
    sc.checks = {
        {"region", {}, 0, "interior", 0},
        {"converged", {}, 1, "", 0},
        {"boundary", {}, 1, "", 0},
        {"q_hat", {0.0, 1.0, 0.0, 1.0}, 0, "", 5e-3},
        {"c_hat", {1.0, 0.0, 0.5, 0.0}, 0, "", 5e-3},
        {"slackness_abs", {}, 0, "", 1e-6},
        {"zero_kind", {}, 0, "curve", 0},
        {"atom_total_mass", {}, 1.0, "", 5e-3},
        {"atom_axis_moment", {1.0, 0.5}, 0, "", 5e-3},
        {"atom_uniqueness", {}, 0, "non-unique", 0},
        {"duality_gap", {}, 0, "", 1e-6},
    };
    return sc;
}

Scenario make_e4() {
    Scenario sc;
    sc.name = "e4";
    sc.summary = "denominator with infinitely many zeros; unit singular mass, "
                 "representation not unique";
    sc.notes = {"zeros accumulate at x = 1"};
    auto alpha2 = [](const double* x) {
        const double xx = x[0];
        if (xx >= 1.0) return 0.0;  // limit value; the raw formula is 0 * cos(inf)
        return (1.0 - xx) * (std::cos(xx / (1.0 - xx)) + 1.0);
    };
    sc.make_basis = [alpha2](const std::vector<int>& res) {
        DomainBox box{1, {{0.0, 1.0}}, false};
        const int m = res.at(0);
        std::vector<std::vector<double>> values(2);
        values[0].assign(static_cast<std::size_t>(m), 1.0);
        values[1].resize(static_cast<std::size_t>(m));
        const double h = 1.0 / m;
        for (int j = 0; j < m; ++j) {
            const double x = (j + 0.5) * h;
            values[1][static_cast<std::size_t>(j)] = alpha2(&x);
        }
        std::vector<std::function<double(const double*)>> samplers = {
            [](const double*) { return 1.0; }, alpha2};
        return shared_basis(BasisSystem::tabulated(box, res, std::move(values), samplers));
    };
    sc.resolution = {4096};
    sc.p = to_eigen({0.0, 1.0});
    sc.q_forward = to_eigen({0.0, 1.0});
    sc.atoms_forward = {{{kPi / (1.0 + kPi)}, 1.0}};  // first zero of alpha2
    sc.checks = {
        {"region", {}, 0, "interior", 0},
        {"converged", {}, 1, "", 0},
        {"boundary", {}, 1, "", 0},
        {"q_hat", {0.0, 1.0}, 0, "", 1e-6},
        {"c_hat", {1.0, 0.0}, 0, "", 1e-5},
        {"slackness_abs", {}, 0, "", 1e-7},
        {"zero_kind", {}, 0, "curve", 0},
        {"atom_total_mass", {}, 1.0, "", 1e-5},
        {"atom_uniqueness", {}, 0, "non-unique", 0},
        {"duality_gap", {}, 0, "", 1e-6},
    };
    return sc;
}

Scenario make_e5() {
    Scenario sc;
    sc.name = "e5";
    sc.summary = "2d power basis with a common zero and no cancellation; residual vanishes";
    sc.make_basis = [](const std::vector<int>&) {
        DomainBox box{2, {{0.0, 1.0}, {0.0, 1.0}}, false};
        return shared_basis(BasisSystem::monomial(
            box, {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {0, 2}, {1, 1}}));
    };
    sc.resolution = {128, 128};
    sc.p = to_eigen({0.0, 0.0, 1.0, 0.0, 1.0, 0.0});
    sc.q_forward = to_eigen({0.0, 1.0, 1.0, 1.0, 1.0, 0.0});
    sc.checks = {
        {"region", {}, 0, "interior", 0},
        {"converged", {}, 1, "", 0},
        {"boundary", {}, 1, "", 0},
        {"q_hat", {0.0, 1.0, 1.0, 1.0, 1.0, 0.0}, 0, "", 1e-6},
        {"c_hat", {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, 0, "", 1e-6},
        {"slackness_abs", {}, 0, "", 1e-9},
        {"zero_kind", {}, 0, "points", 0},
        {"atom_count", {}, 0, "", 0},
        {"duality_gap", {}, 0, "", 1e-6},
    };
    return sc;
}

Scenario make_e6() {
    Scenario sc;
    sc.name = "e6";
    sc.summary = "reciprocal integrability contrast for the boundary cosine denominator";
    sc.notes = {"d=1: divergent", "d=3: convergent"};
    sc.make_basis = [](const std::vector<int>&) {
        DomainBox box{1, {{-kPi, kPi}}, false};
        return shared_basis(BasisSystem::cosine(box, {{0}, {1}}));
    };
    sc.resolution = {16};
    sc.run_classify = sc.run_solve = sc.run_atoms = sc.run_duality = false;
    sc.extra = [](const Scenario&, const GridTableau&, ConfigBlock& doc,
                  std::vector<std::pair<std::string, bool>>& results) {
        auto report = [&doc](const char* name, const DivergenceReport& r) {
            ConfigBlock& b = doc.add_block(name);
            std::vector<ConfigValue> est;
            for (double e : r.estimates) est.push_back(ConfigValue::number(e));
            b.set("estimates", ConfigValue::list(std::move(est)));
            const char* verdict = r.verdict == DivergenceVerdict::Divergent ? "divergent"
                                  : r.verdict == DivergenceVerdict::Convergent
                                      ? "convergent"
                                      : "inconclusive";
            b.set("verdict", ConfigValue::string(verdict));
        };
        DomainBox b1{1, {{-kPi, kPi}}, false};
        BasisSystem cos1 = BasisSystem::cosine(b1, {{0}, {1}});
        DivergenceReport r1 =
            divergence_diagnostic(cos1, CoefVector(to_eigen({1.0, -1.0})), {1024});
        report("dimension_1", r1);
        results.emplace_back("d1_divergent", r1.verdict == DivergenceVerdict::Divergent);

        DomainBox b3{3, {{-kPi, kPi}, {-kPi, kPi}, {-kPi, kPi}}, false};
        BasisSystem cos3 =
            BasisSystem::cosine(b3, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
        DivergenceReport r3 = divergence_diagnostic(
            cos3, CoefVector(to_eigen({3.0, -1.0, -1.0, -1.0})), {64, 64, 64});
        report("dimension_3", r3);
        results.emplace_back("d3_convergent", r3.verdict == DivergenceVerdict::Convergent);
    };
    return sc;
}

}  // namespace

const std::vector<Scenario>& bundled_scenarios() {
    static const std::vector<Scenario> all = [] {
        std::vector<Scenario> v;
        v.push_back(make_e1());
        v.push_back(make_e2());
        v.push_back(make_e3());
        v.push_back(make_e4());
        v.push_back(make_e5());
        v.push_back(make_e6());
        return v;
    }();
    return all;
}

const Scenario* find_scenario(const std::string& name) {
    std::string key = name;
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    for (const Scenario& sc : bundled_scenarios())
        if (sc.name == key) return &sc;
    return nullptr;
}

Scenario scenario_from_config(const ConfigBlock& root) {
    const ConfigBlock& sb = root.at_block("scenario");
    Scenario sc;
    sc.name = sb.string_or("name", "custom");
    sc.summary = sb.string_or("summary", "");

    const ConfigBlock& bb = sb.at_block("basis");
    const std::string family = bb.at("family").as_string();
    DomainBox box;
    box.dim = static_cast<int>(bb.int_or("dim", 1));
    box.normalize = bb.bool_or("normalize", false);
    {
        const ConfigValue& bounds = bb.at("bounds");
        if (!bounds.is_list) throw ConfigError("bounds must be a list", bounds.line, bounds.col);
        for (const ConfigValue& pairv : bounds.items) {
            std::vector<double> lohi = pairv.as_reals();
            if (lohi.size() != 2)
                throw ConfigError("each bounds entry must be [lo, hi]", pairv.line, pairv.col);
            box.bounds.push_back({lohi[0], lohi[1]});
        }
        if (static_cast<int>(box.bounds.size()) != box.dim)
            throw ConfigError("bounds count does not match dim", bounds.line, bounds.col);
    }
    if (family == "cosine" || family == "monomial") {
        const ConfigValue& iv = bb.at("indices");
        if (!iv.is_list) throw ConfigError("indices must be a list", iv.line, iv.col);
        std::vector<std::vector<int>> indices;
        for (const ConfigValue& row : iv.items) indices.push_back(row.as_ints());
        const bool cosine = family == "cosine";
        sc.make_basis = [box, indices, cosine](const std::vector<int>&) {
            return shared_basis(cosine ? BasisSystem::cosine(box, indices)
                                       : BasisSystem::monomial(box, indices));
        };
    } else if (family == "fractional") {
        const ConfigValue& ev = bb.at("exponents");
        if (!ev.is_list) throw ConfigError("exponents must be a list", ev.line, ev.col);
        std::vector<FracExponent> exps;
        for (const ConfigValue& row : ev.items) {
            std::vector<int> nd = row.as_ints();
            if (nd.size() != 2)
                throw ConfigError("each exponent must be [num, den]", row.line, row.col);
            exps.push_back({nd[0], nd[1]});
        }
        sc.make_basis = [box, exps](const std::vector<int>&) {
            return shared_basis(BasisSystem::fractional(box, exps));
        };
    } else if (family == "tabulated") {
        throw ConfigError("the tabulated family needs built-in samplers; use a bundled scenario",
                          bb.line, bb.col);
    } else {
        throw ConfigError("unknown basis family '" + family + "'", bb.line, bb.col);
    }

    const ConfigBlock& gb = sb.at_block("grid");
    sc.resolution = gb.at("resolution").as_ints();
    const std::string rule = gb.string_or("rule", "midpoint");
    if (rule == "midpoint")
        sc.rule = QuadRule::Midpoint;
    else if (rule == "gauss-legendre")
        sc.rule = QuadRule::GaussLegendre;
    else
        throw ConfigError("unknown quadrature rule '" + rule + "'", gb.line, gb.col);

    const ConfigBlock& mb = sb.at_block("moments");
    if (const ConfigValue* cv = mb.find("c")) {
        sc.has_explicit_c = true;
        sc.c_explicit = to_eigen(cv->as_reals());
    } else if (const ConfigValue* qv = mb.find("q")) {
        sc.q_forward = to_eigen(qv->as_reals());
        for (const ConfigBlock* ab : mb.blocks_named("atom")) {
            ScenarioAtomSpec spec;
            spec.point = ab->at("point").as_reals();
            spec.weight = ab->at("weight").as_real();
            sc.atoms_forward.push_back(std::move(spec));
        }
    } else {
        throw ConfigError("moments block needs either c or q", mb.line, mb.col);
    }

    sc.p = to_eigen(sb.at("numerator").as_reals());

    if (const ConfigBlock* ob = sb.find_block("solver")) {
        sc.solver.max_iters = static_cast<int>(ob->int_or("max_iters", sc.solver.max_iters));
        sc.solver.grad_tol_rel = ob->real_or("grad_tol_rel", sc.solver.grad_tol_rel);
        sc.solver.tau_boundary = ob->real_or("tau_boundary", sc.solver.tau_boundary);
        sc.solver.polish = ob->bool_or("polish", sc.solver.polish);
        sc.solver.cond_limit = ob->real_or("cond_limit", sc.solver.cond_limit);
        const std::string kernel = ob->string_or("kernel", "auto");
        if (kernel == "auto")
            sc.solver.kernel = kernels::Kind::Auto;
        else if (kernel == "scalar")
            sc.solver.kernel = kernels::Kind::Scalar;
        else if (kernel == "avx2")
            sc.solver.kernel = kernels::Kind::Avx2;
        else
            throw ConfigError("unknown kernel '" + kernel + "'", ob->line, ob->col);
        if (const ConfigValue* q0 = ob->find("q0"))
            sc.solver.q0 = to_eigen(q0->as_reals());
    }

    sc.run_classify = sb.bool_or("classify", true);
    sc.run_solve = sb.bool_or("solve", true);
    sc.run_atoms = sb.bool_or("atoms", true);
    sc.run_duality = sb.bool_or("duality", true);

    if (const ConfigBlock* eb = sb.find_block("expected")) {
        auto tol_for = [&](const std::string& key, double fallback) {
            return eb->real_or(key + "_tol", fallback);
        };
        for (const auto& [key, value] : eb->values) {
            if (key.size() > 4 && key.rfind("_tol") == key.size() - 4) continue;
            ScenarioCheck ck;
            ck.field = key;
            if (key == "region" || key == "zero_kind" || key == "atom_uniqueness") {
                ck.want_str = value.as_string();
            } else if (key == "boundary" || key == "converged") {
                ck.want_num = value.as_bool() ? 1.0 : 0.0;
            } else if (key == "q_hat" || key == "c_hat") {
                ck.want_vec = value.as_reals();
                ck.tol = tol_for(key, 1e-6);
            } else if (key == "slackness_abs" || key == "duality_gap" ||
                       key == "atom_residual") {
                ck.tol = value.as_real();
            } else if (key == "atom_count" || key == "atom_count_max") {
                ck.want_num = static_cast<double>(value.as_int());
            } else if (key == "atom_total_mass") {
                ck.want_num = value.as_real();
                ck.tol = tol_for(key, 1e-6);
            } else if (key == "atom_axis_moment") {
                ck.want_vec = value.as_reals();
                ck.tol = tol_for(key, 1e-6);
            } else {
                throw ConfigError("unknown expected field '" + key + "'", value.line, value.col);
            }
            sc.checks.push_back(std::move(ck));
        }
    }
    return sc;
}

}  // namespace rmp
