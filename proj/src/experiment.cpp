#include "ndgdm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ndgdm {

void validate(const ExperimentConfig& config) {
  if (config.problem != "laplace" && config.problem != "stripes")
    throw ConfigError("unknown problem '" + config.problem + "'");
  if (config.zeta < 1.0) throw ConfigError("zeta must be at least 1");
  if (config.degree < 1 || config.degree > 10) throw ConfigError("degree out of range [1,10]");
  if (config.penalty <= 0.0) throw ConfigError("penalty constant must be positive");
  if (config.mesh_file.empty() && config.mesh_sizes.empty())
    throw ConfigError("no meshes requested");
  for (int n : config.mesh_sizes)
    if (n < 1) throw ConfigError("mesh size must be positive");
  if (config.target < 1) throw ConfigError("target elements per subdomain must be positive");
  if (config.parts_per_subdomain < 1) throw ConfigError("m must be at least 1");
  if (config.preconditioners.empty()) throw ConfigError("empty preconditioner set");
  for (const auto& name : config.preconditioners) schwarz_mode_from_string(name);
  if (config.tol > 0.1) throw ConfigError("tolerance out of range");
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream stream(value);
  while (std::getline(stream, item, ','))
    if (!item.empty()) items.push_back(item);
  return items;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string joined;
  for (size_t i = 0; i < items.size(); ++i) joined += (i ? "," : "") + items[i];
  return joined;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  ExperimentConfig config;
  config.preconditioners.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "problem") config.problem = value;
      else if (key == "zeta") config.zeta = std::stod(value);
      else if (key == "p") config.degree = std::stoi(value);
      else if (key == "cw") config.penalty = std::stod(value);
      else if (key == "mesh_n") {
        config.mesh_sizes.clear();
        for (const auto& item : split_list(value)) config.mesh_sizes.push_back(std::stoi(item));
      } else if (key == "mesh_file") config.mesh_file = value;
      else if (key == "target") config.target = std::stoi(value);
      else if (key == "m") config.parts_per_subdomain = std::stoi(value);
      else if (key == "precond") config.preconditioners = split_list(value);
      else if (key == "respect_materials") config.respect_materials = value == "1" || value == "true";
      else if (key == "tol") config.tol = std::stod(value);
      else if (key == "seed") config.seed = static_cast<unsigned>(std::stoul(value));
      else if (key == "out") config.out_dir = value;
      else throw ParseError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  return config;
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "# ndgdm experiment configuration\n";
  out << "problem=" << config.problem << '\n';
  out << "zeta=" << format_double(config.zeta) << '\n';
  out << "p=" << config.degree << '\n';
  out << "cw=" << format_double(config.penalty) << '\n';
  std::vector<std::string> sizes;
  for (int n : config.mesh_sizes) sizes.push_back(std::to_string(n));
  out << "mesh_n=" << join_list(sizes) << '\n';
  if (!config.mesh_file.empty()) out << "mesh_file=" << config.mesh_file << '\n';
  out << "target=" << config.target << '\n';
  out << "m=" << config.parts_per_subdomain << '\n';
  out << "precond=" << join_list(config.preconditioners) << '\n';
  out << "respect_materials=" << (config.respect_materials ? 1 : 0) << '\n';
  out << "tol=" << format_double(config.tol) << '\n';
  out << "seed=" << config.seed << '\n';
  if (!config.out_dir.empty()) out << "out=" << config.out_dir << '\n';
}

std::vector<ResultRow> run_experiment(
    const ExperimentConfig& config,
    const std::function<void(const ResultRow&, const SolveReport&)>& on_row) {
  validate(config);
  auto problem = build_benchmark_problem(config.problem, config.zeta);
  problem.config.penalty_constant = config.penalty;
  const double tol = config.tol > 0.0 ? config.tol : problem.default_tol;

  struct MeshCase {
    std::string label;
    Mesh mesh;
  };
  std::vector<MeshCase> cases;
  if (!config.mesh_file.empty()) {
    cases.push_back({"file", load_mesh(config.mesh_file)});
  } else {
    for (int n : config.mesh_sizes)
      cases.push_back({"n" + std::to_string(n), build_uniform_square_mesh(n)});
  }

  std::vector<ResultRow> rows;
  for (auto& [label, mesh] : cases) {
    if (problem.assign_materials) problem.assign_materials(mesh);
    const int n_subdomains = std::max(
        1, static_cast<int>(std::llround(double(mesh.n_triangles()) / config.target)));
    const Partition partition = make_partition(mesh, n_subdomains, config.parts_per_subdomain,
                                               config.respect_materials, config.seed);
    const DgSpace space = build_dof_layout(
        mesh, std::vector<int>(mesh.n_triangles(), config.degree), partition.subdomain_of);
    const DiffusionField diffusion = problem.diffusion(mesh);
    const SparseSystem system = assemble_system(mesh, space, diffusion, problem.config);
    const Eigen::VectorXd x0 = oscillatory_initial_guess(space, mesh);

    CoarseSpace coarse;
    const bool needs_coarse =
        std::any_of(config.preconditioners.begin(), config.preconditioners.end(),
                    [](const std::string& p) { return p != "one_level"; });
    if (needs_coarse) coarse = build_coarse_space(mesh, space, partition, system.matrix);

    for (const auto& name : config.preconditioners) {
      const SchwarzMode mode = schwarz_mode_from_string(name);
      const auto start = std::chrono::steady_clock::now();
      const SchwarzPreconditioner precond(
          system, space, partition, mode == SchwarzMode::one_level ? nullptr : &coarse, mode);
      auto [x, report] = pcg_solve(
          system.matrix, system.rhs, [&](const Eigen::VectorXd& r) { return precond.apply(r); },
          x0, tol, -1);
      const auto stop = std::chrono::steady_clock::now();
      if (!report.converged)
        throw SolveFailure("cg did not converge: problem=" + config.problem + " mesh=" + label +
                           " p=" + std::to_string(config.degree) + " precond=" + name);

      const CostReport cost = precond.cost_report(report.iterations);
      report.fl = cost.total_flops;
      report.comm = cost.comm;

      ResultRow row;
      row.th = mesh.n_triangles();
      row.n_subdomains = partition.n_subdomains;
      row.thi = static_cast<int>(std::llround(double(mesh.n_triangles()) / partition.n_subdomains));
      row.thh = partition.n_coarse;
      row.degree = config.degree;
      row.preconditioner = name;
      row.iter = report.iterations;
      row.mfl = static_cast<double>(cost.total_flops) / 1e6;
      row.mcomm = cost.comm / 1e6;
      row.kappa = report.kappa_estimate;
      row.seconds = std::chrono::duration<double>(stop - start).count();
      rows.push_back(row);
      if (on_row) on_row(row, report);
    }
  }
  return rows;
}

namespace {

std::string row_csv(const ResultRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%d,%s,%lld,%.6g,%.6g,%.6g,%.3f", row.th,
                row.n_subdomains, row.thi, row.thh, row.degree, row.preconditioner.c_str(),
                row.iter, row.mfl, row.mcomm, row.kappa, row.seconds);
  return buf;
}

}  // namespace

void emit_report(const std::vector<ResultRow>& rows, ReportFormat format,
                 const std::string& path) {
  if (rows.empty()) throw ConfigError("no rows to report");
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");

  if (format == ReportFormat::csv) {
    out << "Th,N,Thi,ThH,p,precond,iter,MFl,Mcomm,kappa,seconds\n";
    for (const auto& row : rows) out << row_csv(row) << '\n';
    return;
  }

  // one block per preconditioner, meshes as rows
  std::vector<std::string> names;
  for (const auto& row : rows)
    if (std::find(names.begin(), names.end(), row.preconditioner) == names.end())
      names.push_back(row.preconditioner);
  for (const auto& name : names) {
    out << "### " << name << "\n\n";
    out << "| Th | N | Thi | ThH | p | iter | MFl | Mcomm | kappa | seconds |\n";
    out << "|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& row : rows) {
      if (row.preconditioner != name) continue;
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "| %d | %d | %d | %d | %d | %lld | %.6g | %.6g | %.6g | %.3f |\n", row.th,
                    row.n_subdomains, row.thi, row.thh, row.degree, row.iter, row.mfl, row.mcomm,
                    row.kappa, row.seconds);
      out << buf;
    }
    out << '\n';
  }
}

std::vector<ResultRow> parse_result_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line) || line != "Th,N,Thi,ThH,p,precond,iter,MFl,Mcomm,kappa,seconds")
    throw ParseError(path + ":1: bad result header");
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_list(line);
    if (fields.size() != 11)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected 11 columns");
    ResultRow row;
    try {
      row.th = std::stoi(fields[0]);
      row.n_subdomains = std::stoi(fields[1]);
      row.thi = std::stoi(fields[2]);
      row.thh = std::stoi(fields[3]);
      row.degree = std::stoi(fields[4]);
      row.preconditioner = fields[5];
      row.iter = std::stoll(fields[6]);
      row.mfl = std::stod(fields[7]);
      row.mcomm = std::stod(fields[8]);
      row.kappa = std::stod(fields[9]);
      row.seconds = std::stod(fields[10]);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad field");
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ndgdm
