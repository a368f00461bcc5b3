// Python bindings. Configs cross the boundary as JSON text; the package
// wrapper converts to and from dicts.
#include "agmcts/domains.hpp"
#include "agmcts/harness.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace agmcts;
using nlohmann::json;

namespace {

Vec to_vec(const std::vector<double>& x) {
    if (x.size() > static_cast<std::size_t>(kMaxDim)) throw ConfigError("vector too long");
    Vec v(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = x[i];
    return v;
}

std::vector<double> from_vec(const Vec& v) { return {v.data(), v.data() + v.size()}; }

json stats_json(const SolverStats& s) {
    return {{"sims", s.sims},
            {"wall_seconds", s.wall_seconds},
            {"gradient_steps", s.gradient_steps},
            {"action_updates", s.action_updates},
            {"force_samples", s.force_samples},
            {"prunes", s.prunes},
            {"degenerate_children", s.degenerate_children}};
}

json row_json(const ResultRow& r) {
    json actions = json::array();
    for (const auto& a : r.actions) actions.push_back(from_vec(a));
    return {{"domain", r.domain},       {"solver", r.solver},
            {"n_sims", r.n_sims},       {"seed", r.seed},
            {"discounted_return", r.discounted_return},
            {"steps", r.steps},         {"wall_seconds", r.wall_seconds},
            {"stats", stats_json(r.stats)},
            {"error", r.error},         {"actions", actions}};
}

SolverConfig resolve(const std::string& domain, const std::string& solver,
                     const std::string& overrides) {
    SolverConfig c = default_solver_config(domain, parse_solver(solver));
    apply_solver_overrides(c, json::parse(overrides.empty() ? "{}" : overrides));
    c.validate();
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Action-gradient MCTS planners and benchmark domains";

    // Later registrations are tried first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed") = 0)
        .def("uniform", py::overload_cast<>(&Rng::uniform))
        .def("normal", py::overload_cast<>(&Rng::normal));

    py::class_<ProblemModel, std::shared_ptr<ProblemModel>>(m, "Model")
        .def_property_readonly("name", [](const ProblemModel& p) { return p.info().name; })
        .def_property_readonly("state_dim", [](const ProblemModel& p) { return p.info().state_dim; })
        .def_property_readonly("action_dim", [](const ProblemModel& p) { return p.info().action_dim; })
        .def_property_readonly("discount", [](const ProblemModel& p) { return p.info().discount; })
        .def_property_readonly("horizon", [](const ProblemModel& p) { return p.info().horizon; })
        .def_property_readonly("has_observations",
                               [](const ProblemModel& p) { return p.info().has_observations; })
        .def("sample_initial_state",
             [](const ProblemModel& p, Rng& rng) { return from_vec(p.sample_initial_state(rng)); })
        .def("is_terminal",
             [](const ProblemModel& p, const std::vector<double>& s) { return p.is_terminal(to_vec(s)); })
        .def("sample_transition",
             [](const ProblemModel& p, const std::vector<double>& s, const std::vector<double>& a,
                Rng& rng) {
                 const auto t = p.sample_transition(to_vec(s), to_vec(a), rng);
                 return py::make_tuple(from_vec(t.next), t.reward, from_vec(t.cache));
             })
        .def("log_transition_density",
             [](const ProblemModel& p, const std::vector<double>& s, const std::vector<double>& a,
                const std::vector<double>& next, const std::vector<double>& cache) {
                 return p.log_transition_density(to_vec(s), to_vec(a), to_vec(next), to_vec(cache));
             },
             py::arg("s"), py::arg("a"), py::arg("next"), py::arg("cache") = std::vector<double>{})
        .def("grad_log_transition_density",
             [](const ProblemModel& p, const std::vector<double>& s, const std::vector<double>& a,
                const std::vector<double>& next, const std::vector<double>& cache) {
                 return from_vec(p.grad_log_transition_density(to_vec(s), to_vec(a), to_vec(next),
                                                               to_vec(cache)));
             },
             py::arg("s"), py::arg("a"), py::arg("next"), py::arg("cache") = std::vector<double>{})
        .def("reward",
             [](const ProblemModel& p, const std::vector<double>& s, const std::vector<double>& a,
                const std::vector<double>& next) {
                 const auto r = p.reward_and_grad(to_vec(s), to_vec(a), to_vec(next));
                 return py::make_tuple(r.reward, from_vec(r.grad));
             });

    m.def("make_domain", [](const std::string& name) {
        return std::const_pointer_cast<ProblemModel>(make_domain(name));
    });
    m.def("domain_names", &domain_names);

    m.def("default_solver_config", [](const std::string& domain, const std::string& solver) {
        return solver_config_to_json(default_solver_config(domain, parse_solver(solver))).dump();
    });

    m.def("plan",
          [](const std::string& domain, const std::string& solver, const std::string& overrides,
             const std::vector<std::vector<double>>& particles, int depth) {
              const auto model = make_domain(domain);
              const SolverConfig c = resolve(domain, solver, overrides);
              std::vector<State> ps;
              for (const auto& p : particles) ps.push_back(to_vec(p));
              if (ps.empty()) throw ConfigError("plan: empty root belief");
              PlanningSession session(*model, c, parse_solver(solver));
              Action a;
              {
                  py::gil_scoped_release release;
                  a = session.plan(ParticleBelief::uniform(std::move(ps)), depth);
              }
              return py::make_tuple(from_vec(a), stats_json(session.stats()).dump());
          });

    m.def("run_episode",
          [](const std::string& domain, const std::string& solver, const std::string& overrides,
             std::uint64_t seed, int inference_particles, bool record_actions) {
              const auto model = make_domain(domain);
              const SolverConfig c = resolve(domain, solver, overrides);
              EpisodeOptions opt;
              opt.inference_particles = inference_particles > 0
                                            ? inference_particles
                                            : default_inference_particles(domain);
              opt.record_actions = record_actions;
              ResultRow row;
              {
                  py::gil_scoped_release release;
                  row = run_episode(*model, parse_solver(solver), c, seed, opt);
              }
              return row_json(row).dump();
          });

    m.def("run_sweep", [](const std::string& experiment) {
        const ExperimentConfig cfg = json::parse(experiment).get<ExperimentConfig>();
        std::ostringstream out;
        out << csv_header() << '\n';
        {
            py::gil_scoped_release release;
            run_sweep(cfg, &out);
        }
        return out.str();
    });

    m.def("summarize_csv", [](const std::string& csv) {
        std::istringstream in(csv);
        return summary_csv(summarize(read_csv(in)));
    });
}
