#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "beamnet/manufactured.hpp"
#include "beamnet/pcg.hpp"
#include "beamnet/schwarz.hpp"
#include "beamnet/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace beamnet;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitInternal = 4;

std::string format_full(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  Network net = parse_network(buffer.str());
  finalize_network(net);
  return net;
}

struct GridSpec {
  int nx = 4, ny = 4, nz = 1;
};

GridSpec parse_grid(const std::string& text) {
  GridSpec grid;
  if (text.empty()) return grid;
  if (std::sscanf(text.c_str(), "%d,%d,%d", &grid.nx, &grid.ny, &grid.nz) != 3) {
    throw CLI::ValidationError("--grid", "expected nx,ny,nz");
  }
  return grid;
}

struct SolverSpec {
  LocalSolverMode mode = LocalSolverMode::Direct;
  double inner_tol = 1e-3;
  bool flexible = false;
};

SolverSpec parse_local_solver(const std::string& text, bool flexible_flag) {
  SolverSpec spec;
  spec.flexible = flexible_flag;
  if (text.empty() || text == "direct") return spec;
  double tol = 0.0;
  if (std::sscanf(text.c_str(), "cg:%lf", &tol) == 1 && tol > 0.0) {
    spec.mode = LocalSolverMode::InnerCg;
    spec.inner_tol = tol;
    spec.flexible = true;  // inexact local solves need the flexible recurrence
    return spec;
  }
  throw CLI::ValidationError("--local-solver", "expected 'direct' or 'cg:TOL'");
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
}

json manifest_base(const std::string& command) {
  json manifest;
  manifest["command"] = command;
  manifest["version"] = "beamnet 1.0";
  return manifest;
}

json report_to_json(const SolveReport& report) {
  return json{{"iterations", report.iterations},
              {"converged", report.converged},
              {"final_relative_residual",
               report.residual_history.empty() ? 0.0
                                               : report.residual_history.back()},
              {"solve_ms", report.solve_ms}};
}

std::string residual_csv(const SolveReport& report) {
  std::ostringstream csv;
  csv << "iteration,relative_residual,plain_relative_residual\n";
  for (size_t i = 0; i < report.residual_history.size(); ++i) {
    csv << i << ',' << format_full(report.residual_history[i]) << ','
        << format_full(report.plain_residual_history[i]) << '\n';
  }
  return csv.str();
}

int cmd_validate(const std::string& path, const std::string& out_dir) {
  Network net;
  try {
    net = load_network(path);
  } catch (const std::exception& error) {
    std::cerr << "invalid network: " << error.what() << "\n";
    return kExitInput;
  }
  double h_min = net.edges.empty() ? 0.0 : net.edges.front().length;
  double h_max = h_min;
  for (const auto& edge : net.edges) {
    h_min = std::min(h_min, edge.length);
    h_max = std::max(h_max, edge.length);
  }
  std::vector<bool> dirichlet_mask(net.nodes.size(), false);
  for (const auto& node : net.nodes) {
    dirichlet_mask[node.id] = node.kind == NodeKind::Dirichlet;
  }
  const double lambda_min = lambda_min_estimate(
      graph_laplacian(net), mass_operator(net), dirichlet_mask);

  std::cout << net.nodes.size() << " nodes, " << net.edges.size()
            << " edges, connected, " << net.dirichlet_count() << " Dirichlet\n"
            << "h_min = " << format_full(h_min)
            << ", h_max = " << format_full(h_max) << "\n"
            << "lambda_min = " << format_full(lambda_min) << "\n";
  if (!out_dir.empty()) {
    json report = manifest_base("validate");
    report["input"] = path;
    report["nodes"] = net.nodes.size();
    report["edges"] = net.edges.size();
    report["dirichlet_nodes"] = net.dirichlet_count();
    report["free_nodes"] = net.free_count();
    report["connected"] = true;
    report["h_min"] = h_min;
    report["h_max"] = h_max;
    report["lambda_min"] = lambda_min;
    write_text(fs::path(out_dir) / "validate.json", report.dump(2));
  }
  return 0;
}

json solution_to_json(const Network& net, const GlobalSolution& global) {
  json nodes = json::array();
  for (const auto& node : net.nodes) {
    const Vec6& value = global.node_values[node.id];
    nodes.push_back(json{
        {"id", node.id},
        {"u", {value[0], value[1], value[2]}},
        {"r", {value[3], value[4], value[5]}},
    });
  }
  return json{{"nodes", nodes}};
}

json edgewise_to_json(const Network& net, const GlobalSolution& global) {
  json edges = json::array();
  for (const auto& edge : net.edges) {
    const LocalSolution& sol = global.edgewise[edge.id];
    auto coeffs = [](const MatX& c) {
      json out = json::array();
      for (int j = 0; j < c.cols(); ++j) {
        out.push_back(json{c(0, j), c(1, j), c(2, j)});
      }
      return out;
    };
    edges.push_back(json{{"id", edge.id},
                         {"length", sol.length},
                         {"u", coeffs(sol.coeff_u)},
                         {"r", coeffs(sol.coeff_r)},
                         {"n", coeffs(sol.coeff_n)},
                         {"m", coeffs(sol.coeff_m)}});
  }
  return json{{"basis", "orthonormal Legendre on [0,1], argument x/h"},
              {"edges", edges}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Timoshenko beam network solver"};
  app.require_subcommand(1);

  int p = 3;
  int s = 0;
  double c = 1.0;
  int levels = 5;
  std::string grid_text;
  double tol = 1e-10;
  int maxit = 10000;
  std::string local_solver = "direct";
  bool flexible = false;
  int threads = 1;
  std::string out_dir;
  std::string path;
  std::string precond = "schwarz";
  std::string coarse_policy = "strict";
  std::vector<int> p_list{1, 2};
  std::vector<int> s_list{0};

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--p", p, "polynomial degree");
    cmd->add_option("--s", s, "stabilization exponent (-1, 0, or 1)")
        ->check(CLI::Range(-1, 1));
    cmd->add_option("--c", c, "stabilization scale");
    cmd->add_option("--grid", grid_text, "coarse grid nx,ny,nz");
    cmd->add_option("--tol", tol, "relative residual tolerance");
    cmd->add_option("--maxit", maxit, "iteration limit");
    cmd->add_option("--local-solver", local_solver, "direct | cg:TOL");
    cmd->add_flag("--flexible", flexible, "flexible CG recurrence");
    cmd->add_option("--threads", threads, "assembly threads");
    cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* validate = app.add_subcommand("validate", "check a network file");
  validate->add_option("path", path, "network JSON")->required();
  validate->add_option("--out", out_dir, "output directory");

  CLI::App* solve = app.add_subcommand("solve", "solve a network");
  solve->add_option("path", path, "network JSON")->required();
  add_common(solve);
  solve->add_option("--precond", precond, "none | schwarz");
  solve->add_option("--coarse-policy", coarse_policy, "strict | free");

  CLI::App* convergence =
      app.add_subcommand("convergence", "manufactured-solution rate study");
  convergence->add_option("--p", p_list, "polynomial degrees");
  convergence->add_option("--s", s_list, "stabilization exponents");
  convergence->add_option("--c", c, "stabilization scale");
  convergence->add_option("--levels", levels, "refinement levels");
  convergence->add_option("--out", out_dir, "output directory");

  CLI::App* precond_cmd =
      app.add_subcommand("precond", "preconditioner comparison study");
  precond_cmd->add_option("path", path, "network JSON")->required();
  add_common(precond_cmd);
  precond_cmd->add_option("--coarse-policy", coarse_policy, "strict | free");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      return cmd_validate(path, out_dir);
    }

    const StabilizationRule rule{s, c};
    const GridSpec grid_spec = parse_grid(grid_text);
    const SolverSpec solver_spec = parse_local_solver(local_solver, flexible);
    const CoarsePolicy policy =
        coarse_policy == "free" ? CoarsePolicy::Free : CoarsePolicy::Strict;

    if (solve->parsed()) {
      Network net;
      try {
        net = load_network(path);
      } catch (const std::exception& error) {
        std::cerr << "invalid network: " << error.what() << "\n";
        return kExitInput;
      }
      const auto start = std::chrono::steady_clock::now();
      const CondensedSystem system = assemble(net, p, rule, {}, threads);

      Preconditioner preconditioner = [](const VecX& r) { return r; };
      SchwarzSetup setup;
      if (precond == "schwarz") {
        setup = build_schwarz(
            system,
            CoarseGrid::bounding(net, grid_spec.nx, grid_spec.ny, grid_spec.nz),
            policy, solver_spec.mode, solver_spec.inner_tol);
        preconditioner = [&setup](const VecX& r) {
          return apply_preconditioner(setup, r);
        };
      } else if (precond != "none") {
        std::cerr << "unknown preconditioner '" << precond << "'\n";
        return kExitInput;
      }

      PcgOptions options{tol, maxit, solver_spec.flexible};
      auto [solution, report] = pcg(system, preconditioner, options);
      const double wall_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
      const GlobalSolution global = recover(system, solution);

      if (!out_dir.empty()) {
        write_text(fs::path(out_dir) / "solution.json",
                   solution_to_json(net, global).dump(2));
        write_text(fs::path(out_dir) / "edgewise.json",
                   edgewise_to_json(net, global).dump(2));
        write_text(fs::path(out_dir) / "residuals.csv", residual_csv(report));
        json manifest = manifest_base("solve");
        manifest["input"] = path;
        manifest["p"] = p;
        manifest["stabilization"] = {{"s", s}, {"c", c}};
        manifest["solver"] = {{"tol", tol},
                              {"maxit", maxit},
                              {"precond", precond},
                              {"grid", {grid_spec.nx, grid_spec.ny, grid_spec.nz}},
                              {"coarse_policy", coarse_policy},
                              {"local_solver", local_solver},
                              {"flexible", solver_spec.flexible}};
        manifest["threads"] = threads;
        manifest["wall_ms"] = wall_ms;
        manifest["report"] = report_to_json(report);
        write_text(fs::path(out_dir) / "manifest.json", manifest.dump(2));
      }
      std::cout << (report.converged ? "converged" : "NOT converged") << " in "
                << report.iterations << " iterations, relative residual "
                << format_full(report.residual_history.back()) << "\n";
      return report.converged ? 0 : kExitNoConvergence;
    }

    if (convergence->parsed()) {
      json summary = json::array();
      for (int degree : p_list) {
        for (int exponent : s_list) {
          const StabilizationRule study_rule{exponent, c};
          const auto records = convergence_study(degree, study_rule, levels);
          std::ostringstream csv;
          csv << "level,h_max,err_primal,err_dual,eoc_primal,eoc_dual\n";
          for (const auto& record : records) {
            csv << record.level << ',' << format_full(record.h_max) << ','
                << format_full(record.err_primal) << ','
                << format_full(record.err_dual) << ','
                << format_full(record.eoc_primal) << ','
                << format_full(record.eoc_dual) << '\n';
          }
          const std::string name = "convergence_p" + std::to_string(degree) +
                                   "_s" + std::to_string(exponent);
          if (!out_dir.empty()) {
            write_text(fs::path(out_dir) / (name + ".csv"), csv.str());
          } else {
            std::cout << name << "\n" << csv.str();
          }
          const auto& last = records.back();
          const auto& prev = records[records.size() - 2];
          summary.push_back(json{
              {"p", degree},
              {"s", exponent},
              {"eoc_primal", 0.5 * (last.eoc_primal + prev.eoc_primal)},
              {"eoc_dual", 0.5 * (last.eoc_dual + prev.eoc_dual)}});
          std::cout << name << ": asymptotic primal EOC "
                    << format_full(summary.back()["eoc_primal"].get<double>())
                    << ", dual EOC "
                    << format_full(summary.back()["eoc_dual"].get<double>())
                    << "\n";
        }
      }
      if (!out_dir.empty()) {
        json manifest = manifest_base("convergence");
        manifest["p"] = p_list;
        manifest["s"] = s_list;
        manifest["c"] = c;
        manifest["levels"] = levels;
        manifest["summary"] = summary;
        write_text(fs::path(out_dir) / "manifest.json", manifest.dump(2));
      }
      return 0;
    }

    if (precond_cmd->parsed()) {
      Network net;
      try {
        net = load_network(path);
      } catch (const std::exception& error) {
        std::cerr << "invalid network: " << error.what() << "\n";
        return kExitInput;
      }
      const CondensedSystem system = assemble(net, p, rule, {}, threads);
      const SchwarzSetup setup = build_schwarz(
          system,
          CoarseGrid::bounding(net, grid_spec.nx, grid_spec.ny, grid_spec.nz),
          policy, solver_spec.mode, solver_spec.inner_tol);

      SchwarzSetup coarse_only = build_schwarz(
          system,
          CoarseGrid::bounding(net, grid_spec.nx, grid_spec.ny, grid_spec.nz),
          policy, solver_spec.mode, solver_spec.inner_tol);
      coarse_only.subdomains.clear();
      coarse_only.subdomain_solvers.clear();
      coarse_only.subdomain_matrices.clear();

      struct Mode {
        std::string name;
        Preconditioner apply;
      };
      std::vector<Mode> modes;
      modes.push_back({"none", [](const VecX& r) { return r; }});
      modes.push_back({"coarse-only", [&](const VecX& r) {
                         return VecX(coarse_only.restriction *
                                     coarse_only.coarse_solver.solve(
                                         VecX(coarse_only.restriction.transpose() * r)));
                       }});
      modes.push_back({"local-only", [&](const VecX& r) {
                         VecX z = VecX::Zero(r.size());
                         for (size_t i = 0; i < setup.subdomains.size(); ++i) {
                           const auto& dofs = setup.subdomains[i];
                           VecX local(dofs.size());
                           for (size_t j = 0; j < dofs.size(); ++j) local[j] = r[dofs[j]];
                           const VecX corr = setup.subdomain_solvers[i]->solve(local);
                           for (size_t j = 0; j < dofs.size(); ++j) z[dofs[j]] += corr[j];
                         }
                         return z;
                       }});
      modes.push_back({"two-level", [&](const VecX& r) {
                         return apply_preconditioner(setup, r);
                       }});

      json manifest = manifest_base("precond");
      manifest["input"] = path;
      manifest["p"] = p;
      manifest["grid"] = {grid_spec.nx, grid_spec.ny, grid_spec.nz};
      json results = json::array();
      for (const auto& mode : modes) {
        PcgOptions options{tol, maxit, solver_spec.flexible};
        auto [solution, report] = pcg(system, mode.apply, options);
        std::cout << mode.name << ": " << report.iterations << " iterations, "
                  << (report.converged ? "converged" : "NOT converged") << "\n";
        if (!out_dir.empty()) {
          write_text(fs::path(out_dir) / ("residuals_" + mode.name + ".csv"),
                     residual_csv(report));
        }
        results.push_back(
            json{{"mode", mode.name}, {"report", report_to_json(report)}});
      }
      manifest["results"] = results;
      if (!out_dir.empty()) {
        write_text(fs::path(out_dir) / "manifest.json", manifest.dump(2));
      }
      return 0;
    }
  } catch (const ParseError& error) {
    std::cerr << "input error: " << error.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& error) {
    std::cerr << "input error: " << error.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& error) {
    std::cerr << "input error: " << error.what() << "\n";
    return kExitInput;
  } catch (const std::exception& error) {
    std::cerr << "internal error: " << error.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
