#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "axlab/experiments.hpp"
#include "axlab/genealogy.hpp"
#include "axlab/particles.hpp"
#include "axlab/theory.hpp"
#include "axlab/trajectory_io.hpp"
#include "axlab/verify.hpp"
#include "axlab/walks.hpp"

namespace py = pybind11;
using namespace axlab;

namespace {

// Exact values cross the boundary as fractions.Fraction.
py::object fraction(const BigRational& r)
{
    static py::object cls = py::module_::import("fractions").attr("Fraction");
    std::ostringstream os;
    os << r;
    return cls(os.str());
}

py::object fraction(const Ratio& r) { return py::module_::import("fractions").attr("Fraction")(r.numerator(), r.denominator()); }

std::vector<std::vector<int>> cultures(const Configuration& c)
{
    std::vector<std::vector<int>> out(static_cast<std::size_t>(c.vertices()));
    for (int x = 0; x < c.vertices(); ++x)
        for (State s : c.culture(x)) out[static_cast<std::size_t>(x)].push_back(s);
    return out;
}

py::dict report_dict(const ExperimentReport& r)
{
    py::dict aggregates;
    for (const auto& a : r.aggregates) aggregates[py::str(a.name)] = py::make_tuple(a.value, a.standard_error);
    py::dict d;
    d["experiment"] = r.experiment;
    d["params"] = r.params;
    d["replicas"] = r.replicas;
    d["seed"] = r.seed.value;
    d["columns"] = r.columns;
    d["records"] = r.records;
    d["aggregates"] = aggregates;
    d["notes"] = r.notes;
    return d;
}

ExperimentOptions experiment_options(const std::string& engine, double horizon, std::uint64_t event_cap,
                                     unsigned threads)
{
    return {parse_engine(engine), horizon, event_cap, threads};
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Bindings for the one-dimensional Axelrod model simulator";

    py::register_exception<ReplayError>(m, "ReplayError", PyExc_ValueError);
    py::register_exception<TrackingError>(m, "TrackingError", PyExc_RuntimeError);
    py::register_exception<GenealogyError>(m, "GenealogyError", PyExc_RuntimeError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](int F, int q, int L, const std::string& topology) {
                 ModelParams p{F, q, L, parse_topology(topology)};
                 p.validate();
                 return p;
             }),
             py::arg("F"), py::arg("q"), py::arg("L"), py::arg("topology") = "interval")
        .def_readonly("F", &ModelParams::F)
        .def_readonly("q", &ModelParams::q)
        .def_readonly("L", &ModelParams::L)
        .def_property_readonly("topology", [](const ModelParams& p) { return std::string(to_string(p.topology)); })
        .def_property_readonly("edges", &ModelParams::edge_count)
        .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; })
        .def("__repr__", [](const ModelParams& p) { return "ModelParams(" + describe(p) + ")"; });

    py::class_<Configuration>(m, "Configuration")
        .def(py::init([](const ModelParams& p, const std::vector<std::vector<int>>& c) { return Configuration(p, c); }),
             py::arg("params"), py::arg("cultures"))
        .def_property_readonly("params", &Configuration::params)
        .def("state", &Configuration::state, py::arg("x"), py::arg("feature"))
        .def("cultures", &cultures)
        .def("is_absorbed", &is_absorbed)
        .def("blockades", &blockade_count)
        .def("domains", &domain_count)
        .def("zeta", [](const Configuration& c) { return derive_particles(c).counts(); })
        .def("apply_update", &apply_update, py::arg("x"), py::arg("y"), py::arg("feature"))
        .def("overlap", [](const Configuration& c, int x, int y) { return fraction(overlap(c, x, y)); })
        .def("__eq__", [](const Configuration& a, const Configuration& b) { return a == b; });

    m.def("sample_pi0", [](const ModelParams& p, std::uint64_t seed) { return sample_pi0(p, Seed{seed}); },
          py::arg("params"), py::arg("seed"));
    m.def("jump_rate", [](int j, int F) { return fraction(jump_rate(j, F)); }, py::arg("j"), py::arg("F"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("params", &Trajectory::params)
        .def_readonly("initial", &Trajectory::initial)
        .def_readonly("final", &Trajectory::final)
        .def_readonly("end_time", &Trajectory::end_time)
        .def_readonly("absorbed", &Trajectory::absorbed)
        .def_readonly("effective_events", &Trajectory::effective_events)
        .def_readonly("arrows_drawn", &Trajectory::arrows_drawn)
        .def_property_readonly("engine", [](const Trajectory& t) { return std::string(to_string(t.engine)); })
        .def_property_readonly("stop", [](const Trajectory& t) { return std::string(to_string(t.stop)); })
        .def_property_readonly("events",
                               [](const Trajectory& t) {
                                   py::list out;
                                   for (const auto& e : t.events)
                                       out.append(py::make_tuple(e.time, e.source, e.target, e.feature, e.mark,
                                                                 e.active, e.effective));
                                   return out;
                               })
        .def("replay", [](const Trajectory& t) { return replay(t); })
        .def("save", [](const Trajectory& t, const std::filesystem::path& p) { save_trajectory(p, t); }, py::arg("path"))
        .def("__eq__", [](const Trajectory& a, const Trajectory& b) { return a == b; });

    m.def(
        "run",
        [](const Configuration& initial, const std::string& engine, std::uint64_t seed, double horizon,
           std::uint64_t event_cap, const std::string& log) {
            RunOptions o{horizon, event_cap, parse_log_policy(log)};
            py::gil_scoped_release release;
            return run_engine(parse_engine(engine), initial, o, Seed{seed});
        },
        py::arg("initial"), py::arg("engine") = "gillespie", py::arg("seed") = 1,
        py::arg("horizon") = std::numeric_limits<double>::infinity(), py::arg("event_cap") = default_event_cap,
        py::arg("log") = "all");
    m.def("load_trajectory", [](const std::filesystem::path& p) { return load_trajectory(p); });
    m.def("save_trajectory", &save_trajectory, py::arg("path"), py::arg("trajectory"));

    m.def(
        "track",
        [](const Trajectory& t) {
            const auto r = track(t);
            const auto c = collision_stats(r.collisions);
            py::dict d;
            d["collisions"] = c.collisions;
            d["annihilations"] = c.annihilations;
            d["coalescences"] = c.coalescences;
            d["blockade_events"] = r.blockade_events.size();
            d["exits"] = r.exits;
            d["initial_zeta"] = r.initial_zeta;
            d["initial_per_feature"] = r.initial_per_feature;
            d["final_per_feature"] = r.final_per_feature;
            return d;
        },
        py::arg("trajectory"));

    m.def("ancestor", &ancestor, py::arg("trajectory"), py::arg("x"), py::arg("feature"), py::arg("time"));
    m.def("ancestry", [](const Trajectory& t, int feature, double time) { return ancestry_profile(t, feature, time).ancestor; },
          py::arg("trajectory"), py::arg("feature"), py::arg("time"));
    m.def("descendant_count", [](const Trajectory& t, int origin, int feature, double time) {
        return descendants(t, origin, feature, time).count;
    }, py::arg("trajectory"), py::arg("origin"), py::arg("feature"), py::arg("time"));

    m.def("omega", [](int q, int F) { return fraction(omega(q, F)); }, py::arg("q"), py::arg("F"));
    m.def("critical_slope", &critical_slope);
    m.def(
        "phase_grid",
        [](int q_max, int F_max) {
            const auto g = phase_grid(q_max, F_max);
            py::list rows;
            for (const auto& c : g.cells) rows.append(py::make_tuple(c.q, c.F, fraction(c.omega), c.sign));
            return rows;
        },
        py::arg("q_max") = 100, py::arg("F_max") = 100);
    m.def("exact_tail", [](int q, int F, int N) { return exact_tail_le_zero(q, F, N); }, py::arg("q"), py::arg("F"),
          py::arg("N"));
    m.def("exact_tail_fraction", [](int q, int F, int N) { return fraction(exact_tail_le_zero_rational(q, F, N)); },
          py::arg("q"), py::arg("F"), py::arg("N"));
    m.def(
        "mc_tail",
        [](int q, int F, int N, std::uint64_t samples, std::uint64_t seed) {
            const auto e = mc_tail(q, F, N, samples, Seed{seed});
            return py::make_tuple(e.estimate, e.standard_error);
        },
        py::arg("q"), py::arg("F"), py::arg("N"), py::arg("samples"), py::arg("seed") = 1);
    m.def(
        "refined_margin",
        [](int q) {
            const auto r = refined_margin(q);
            py::dict d;
            d["nu0"] = fraction(r.nu0);
            d["nu1"] = fraction(r.nu1);
            d["nu2"] = fraction(r.nu2);
            d["margin"] = fraction(r.margin);
            return d;
        },
        py::arg("q"));

    m.def(
        "fixation",
        [](const ModelParams& p, std::uint64_t replicas, std::uint64_t seed, const std::string& engine,
           double horizon, std::uint64_t event_cap, unsigned threads) {
            ExperimentReport r;
            {
                py::gil_scoped_release release;
                r = fixation_run(p, replicas, Seed{seed}, experiment_options(engine, horizon, event_cap, threads));
            }
            return report_dict(r);
        },
        py::arg("params"), py::arg("replicas"), py::arg("seed") = 1, py::arg("engine") = "gillespie",
        py::arg("horizon") = std::numeric_limits<double>::infinity(), py::arg("event_cap") = default_event_cap,
        py::arg("threads") = 1);
    m.def(
        "collisions",
        [](const ModelParams& p, std::uint64_t min_collisions, std::uint64_t seed, unsigned threads) {
            CollisionOptions o;
            o.run.threads = threads;
            ExperimentReport r;
            {
                py::gil_scoped_release release;
                r = collision_outcome_experiment(p, min_collisions, Seed{seed}, o);
            }
            return report_dict(r);
        },
        py::arg("params"), py::arg("min_collisions"), py::arg("seed") = 1, py::arg("threads") = 1);
    m.def(
        "martingale",
        [](const ModelParams& p, double time, int site, std::uint64_t replicas, std::uint64_t seed, unsigned threads) {
            ExperimentReport r;
            {
                py::gil_scoped_release release;
                r = martingale_experiment(p, time, site, replicas, Seed{seed}, threads);
            }
            return report_dict(r);
        },
        py::arg("params"), py::arg("time"), py::arg("site"), py::arg("replicas"), py::arg("seed") = 1,
        py::arg("threads") = 1);
    m.def("race", [](int q, std::uint64_t replicas, std::uint64_t seed) {
        return report_dict(six_arrow_race(q, replicas, Seed{seed}));
    }, py::arg("q"), py::arg("replicas"), py::arg("seed") = 1);

    m.def("suite_names", &suite_names);
    m.def(
        "verify",
        [](const std::string& suite, std::uint64_t seed, unsigned threads) {
            VerifyOptions o;
            o.seed = Seed{seed};
            o.threads = threads;
            std::vector<CheckResult> results;
            {
                py::gil_scoped_release release;
                results = run_suite(suite, o);
            }
            py::list out;
            for (const auto& r : results) out.append(py::make_tuple(r.name, r.passed, r.detail));
            return out;
        },
        py::arg("suite"), py::arg("seed") = 20240601, py::arg("threads") = 1);
}
