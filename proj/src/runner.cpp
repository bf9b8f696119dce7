#include "immergrid/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "json.hpp"

#include "immergrid/solvers.hpp"
#include "immergrid/spectral.hpp"

namespace immergrid {

using nlohmann::json;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::ofstream open_artifact(const std::string& path, bool schema_line) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (schema_line) out << "#schema=1\n";
  return out;
}

Field2 constant_field(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < v.size() && i < 2; ++i) c[static_cast<int>(i)] = v[i];
  return [c](const Vec2&) { return c; };
}

// Error text destined for a CSV cell: no separators, no line breaks.
std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

// Extracts a message from whatever is currently being handled, including the
// non-exception solver outcome types.
std::string current_error_message() {
  try {
    throw;
  } catch (const NotConverged& nc) {
    return "solver did not converge within " + std::to_string(nc.report.iterations) +
           " iterations";
  } catch (const Diverged& d) {
    return "solver diverged after " + std::to_string(d.report.iterations) + " iterations";
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

json run_metadata(const CaseConfig& cfg, const RunOptions& opt) {
  json j;
  j["schema"] = 1;
  j["subcommand"] = opt.subcommand;
  j["geometry"] = cfg.geometry;
  j["config_toml"] = print_config(cfg);
  return j;
}

void write_json(const std::string& path, const json& j) {
  open_artifact(path, false) << j.dump(2) << "\n";
}

// --- composed spectral operators -------------------------------------------

// Owns whatever the composition needs; the operator stays valid as long as
// both this struct and the case's matrix are alive.
struct ComposedOp {
  const SpMat* A = nullptr;
  VecX inv_diag;                     // jacobi
  std::unique_ptr<Smoother> sm;      // gs2 / as2 / ms2
  std::unique_ptr<MgHierarchy> mg;   // vcycle

  LinOp linop() const {
    return [this](const VecX& v) {
      VecX av = (*A) * v;
      if (inv_diag.size()) return VecX(inv_diag.cwiseProduct(av));
      if (sm) return sm->apply_symmetric(av);
      return mg->apply(av);
    };
  }
};

ComposedOp make_composed(const CaseConfig& cfg, const BuiltCase& bc, const std::string& name) {
  ComposedOp c;
  c.A = &bc.op.A;
  if (name == "jacobi") {
    const VecX d = bc.op.A.diagonal();
    if ((d.array() <= 0.0).any())
      throw std::runtime_error("spectrum: operator diagonal is not positive");
    c.inv_diag = d.cwiseInverse();
  } else if (name == "gs2" || name == "as2" || name == "ms2") {
    SmootherConfig sc = cfg.smoother;
    sc.kind = name == "gs2"   ? SmootherKind::GaussSeidel
              : name == "as2" ? SmootherKind::AdditiveSchwarz
                              : SmootherKind::MultiplicativeSchwarz;
    c.sm = std::make_unique<Smoother>(make_smoother(bc.op.A, *bc.space, sc));
  } else if (name == "vcycle") {
    c.mg = std::make_unique<MgHierarchy>(
        MgHierarchy::build(bc.space, bc.op.A, cfg.mg.levels, cfg.smoother));
  } else {
    throw ConfigError("spectrum: unknown operator \"" + name +
                      "\" (one of: jacobi, gs2, as2, ms2, vcycle)");
  }
  return c;
}

void write_residuals_csv(const std::string& path, const std::vector<double>& residuals) {
  auto out = open_artifact(path, true);
  out << "iteration,relative_residual\n";
  for (std::size_t k = 0; k < residuals.size(); ++k)
    out << k << "," << format_double(residuals[k]) << "\n";
}

// --- field sampling ----------------------------------------------------------

void write_field_csv(const std::string& path, const FunctionSpace& space, const VecX& x,
                     int samples, const char* value_header) {
  if (samples < 2) throw ConfigError("samples: must be >= 2");
  auto out = open_artifact(path, true);
  out << "x,y," << value_header << "\n";
  const EmbeddingGrid& g = space.tm->mesh.grid();
  for (int iy = 0; iy < samples; ++iy)
    for (int ix = 0; ix < samples; ++ix) {
      const Vec2 p = g.origin + Vec2(g.extent.x() * ix / (samples - 1),
                                     g.extent.y() * iy / (samples - 1));
      const VecX v = sample_field(space, x, p);
      if (!v.size()) continue;
      out << format_double(p.x()) << "," << format_double(p.y());
      for (int k = 0; k < v.size(); ++k) out << "," << format_double(v[k]);
      out << "\n";
    }
}

// --- subcommands --------------------------------------------------------------

int cmd_print_config(const CaseConfig& cfg) {
  std::cout << print_config(cfg);
  return 0;
}

int cmd_quadrature_check(const CaseConfig& cfg, const RunOptions& opt) {
  const double t0 = now_seconds();
  const HierarchicalMesh mesh = build_mesh(cfg);
  const auto tm = trim(mesh, parse_levelset(cfg.geometry), cfg.quadrature.classify_depth);

  double area = 0.0, interface_len = 0.0, side_len = 0.0;
  long cut = 0, inside = 0;
  for (const auto& te : tm->elements()) {
    area += volume_rule(tm->ls, te.box, te.tag, cfg.quadrature).total_weight();
    if (te.tag == ElemTag::Cut) {
      ++cut;
      interface_len += boundary_rule(tm->ls, te.box, te.tag, cfg.quadrature).total_weight();
    } else {
      ++inside;
    }
    const auto& g = tm->mesh.grid();
    const int cx = g.cells_x(te.id.level), cy = g.cells_y(te.id.level);
    const int sides[4] = {te.id.iy == 0 ? 0 : -1, te.id.ix == cx - 1 ? 1 : -1,
                          te.id.iy == cy - 1 ? 2 : -1, te.id.ix == 0 ? 3 : -1};
    for (int s : sides)
      if (s >= 0) side_len += side_rule(tm->ls, te.box, s, cfg.quadrature).total_weight();
  }
  const double eta = min_volume_fraction(*tm, cfg.quadrature);
  const double seconds = now_seconds() - t0;

  auto out = open_artifact(opt.out_prefix + ".csv", true);
  out << "quantity,value\n";
  out << "area," << format_double(area) << "\n";
  out << "interface_length," << format_double(interface_len) << "\n";
  out << "side_length," << format_double(side_len) << "\n";
  out << "boundary_length," << format_double(interface_len + side_len) << "\n";
  out << "eta," << format_double(eta) << "\n";
  out << "elements," << tm->elements().size() << "\n";
  out << "cut_elements," << cut << "\n";
  out << "inside_elements," << inside << "\n";
  out.close();

  json j = run_metadata(cfg, opt);
  j["area"] = area;
  j["interface_length"] = interface_len;
  j["side_length"] = side_len;
  j["boundary_length"] = interface_len + side_len;
  j["eta"] = eta;
  j["elements"] = tm->elements().size();
  j["cut_elements"] = cut;
  j["seconds"] = seconds;
  write_json(opt.out_prefix + ".json", j);

  std::cout << "area = " << format_double(area)
            << ", boundary length = " << format_double(interface_len + side_len)
            << ", eta = " << format_double(eta) << " (" << tm->elements().size() << " elements, "
            << cut << " cut) in " << format_double(seconds) << " s\n"
            << "artifacts: " << opt.out_prefix << ".csv, " << opt.out_prefix << ".json\n";
  return 0;
}

int cmd_solve(const CaseConfig& cfg, const RunOptions& opt) {
  const double t0 = now_seconds();
  const BuiltCase bc = build_case(cfg);
  const double eta = min_volume_fraction(*bc.tm, cfg.quadrature);
  const double t1 = now_seconds();
  const MgHierarchy mg = MgHierarchy::build(bc.space, bc.op.A, cfg.mg.levels, cfg.smoother);
  const double t2 = now_seconds();
  const Preconditioner precond = [&mg](const VecX& r) { return mg.apply(r); };

  json j = run_metadata(cfg, opt);
  j["n"] = bc.space->n();
  j["eta"] = eta;
  j["levels"] = cfg.mg.levels;
  std::vector<int> level_dofs;
  for (int l = 0; l < mg.levels(); ++l) level_dofs.push_back(mg.level(l).space->n());
  j["level_dofs"] = level_dofs;  // coarsest first
  j["coarse_rank"] = mg.coarse_rank();

  try {
    auto [x, rep] = cfg.solver.type == "pcg"
                        ? pcg(bc.op.A, bc.op.b, precond, cfg.solver.tol, cfg.solver.maxit)
                        : richardson(bc.op.A, bc.op.b, precond, cfg.solver.tol, cfg.solver.maxit);
    const double t3 = now_seconds();

    j["converged"] = true;
    j["iterations"] = rep.iterations;
    j["final_residual"] = rep.residuals.back();
    j["residuals"] = rep.residuals;
    j["seconds"] = {{"assemble", t1 - t0},
                    {"mg_setup", t2 - t1},
                    {"solve", t3 - t2},
                    {"total", t3 - t0}};

    auto coeffs = open_artifact(opt.out_prefix + "_coeffs.csv", true);
    coeffs << "dof,value\n";
    for (int i = 0; i < x.size(); ++i) coeffs << i << "," << format_double(x[i]) << "\n";
    coeffs.close();
    write_residuals_csv(opt.out_prefix + "_residuals.csv", rep.residuals);
    write_field_csv(opt.out_prefix + "_field.csv", *bc.space, x, opt.samples,
                    bc.space->components == 1 ? "u" : "ux,uy");
    write_json(opt.out_prefix + ".json", j);

    std::cout << "n = " << bc.space->n() << ", eta = " << format_double(eta) << "\n"
              << cfg.solver.type << " converged in " << rep.iterations
              << " iterations, final relative residual " << format_double(rep.residuals.back())
              << "\n"
              << "artifacts: " << opt.out_prefix << "_coeffs.csv, " << opt.out_prefix
              << "_residuals.csv, " << opt.out_prefix << "_field.csv, " << opt.out_prefix
              << ".json\n";
    return 0;
  } catch (...) {
    const std::string msg = current_error_message();
    j["converged"] = false;
    j["error"] = msg;
    try {
      throw;
    } catch (const NotConverged& nc) {
      j["iterations"] = nc.report.iterations;
      j["residuals"] = nc.report.residuals;
      write_residuals_csv(opt.out_prefix + "_residuals.csv", nc.report.residuals);
    } catch (const Diverged& d) {
      j["iterations"] = d.report.iterations;
      j["residuals"] = d.report.residuals;
      write_residuals_csv(opt.out_prefix + "_residuals.csv", d.report.residuals);
    } catch (const Breakdown& b) {
      j["iterations"] = b.report.iterations;
    } catch (...) {
    }
    write_json(opt.out_prefix + ".json", j);
    std::cerr << "solver failure: " << msg << "\n";
    return 1;
  }
}

int cmd_spectrum(const CaseConfig& cfg, const RunOptions& opt) {
  const double t0 = now_seconds();
  const BuiltCase bc = build_case(cfg);
  const double eta = min_volume_fraction(*bc.tm, cfg.quadrature);
  const ComposedOp cop = make_composed(cfg, bc, opt.spectrum_op);
  const int n = bc.space->n();
  if (opt.mode >= n) throw ConfigError("mode: index out of range (n = " + std::to_string(n) + ")");
  const SpectrumResult sr = dense_spectrum(cop.linop(), n, opt.mode >= 0);
  const double seconds = now_seconds() - t0;

  auto out = open_artifact(opt.out_prefix + "_eigs.csv", true);
  out << "index,eigenvalue\n";
  for (std::size_t i = 0; i < sr.eigenvalues.size(); ++i)
    out << i << "," << format_double(sr.eigenvalues[i]) << "\n";
  out.close();

  if (opt.mode >= 0) {
    VecX v = sr.vectors.col(opt.mode);
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;  // deterministic sign
    write_field_csv(opt.out_prefix + "_mode.csv", *bc.space, v, opt.samples,
                    bc.space->components == 1 ? "value" : "value,value2");
  }

  json j = run_metadata(cfg, opt);
  j["operator"] = opt.spectrum_op;
  j["n"] = n;
  j["eta"] = eta;
  j["lambda_min"] = sr.lambda_min;
  j["lambda_max"] = sr.lambda_max;
  j["kappa"] = sr.kappa;
  if (opt.mode >= 0) j["mode"] = opt.mode;
  j["seconds"] = seconds;
  write_json(opt.out_prefix + ".json", j);

  std::cout << "operator " << opt.spectrum_op << " on n = " << n
            << ": lambda_min = " << format_double(sr.lambda_min)
            << ", lambda_max = " << format_double(sr.lambda_max)
            << ", kappa = " << format_double(sr.kappa) << " in " << format_double(seconds)
            << " s\n"
            << "artifacts: " << opt.out_prefix << "_eigs.csv, " << opt.out_prefix << ".json\n";
  return 0;
}

// --- sweep ---------------------------------------------------------------------

struct PointRow {
  double value = 0.0;
  long n = -1;  // negative = blank
  double eta = NAN;
  long iterations = -1;
  double lambda_min = NAN, lambda_max = NAN, kappa = NAN, kappa_jacobi = NAN;
  double seconds = 0.0;
  std::string error;  // empty = ok
};

CaseConfig point_config(const CaseConfig& base, const std::string& axis, double v) {
  CaseConfig c = base;
  const long iv = std::lround(v);
  if (axis == "grid") {
    if (iv < 1 || iv != v) throw ConfigError("sweep: grid values must be positive integers");
    const double ratio = static_cast<double>(iv) / base.mesh.resolution[0];
    const double ry = base.mesh.resolution[1] * ratio;
    if (std::abs(ry - std::lround(ry)) > 1e-9)
      throw ConfigError("sweep: grid value breaks the mesh aspect ratio");
    c.mesh.resolution = {static_cast<int>(iv), static_cast<int>(std::lround(ry))};
    // Same integrated geometry on every grid: the bisection leaf size
    // h * 2^-depth stays fixed as h changes.
    const int shift = static_cast<int>(std::lround(std::log2(ratio)));
    c.quadrature.depth = std::max(0, base.quadrature.depth - shift);
  } else if (axis == "levels") {
    if (iv < 1 || iv != v) throw ConfigError("sweep: levels values must be positive integers");
    c.mg.levels = static_cast<int>(iv);
  } else if (axis == "depth") {
    if (iv < 0 || iv != v) throw ConfigError("sweep: depth values must be nonnegative integers");
    c.quadrature.depth = static_cast<int>(iv);
  }
  validate(c);
  return c;
}

PointRow run_point(const CaseConfig& base, const std::string& axis, double value,
                   bool with_spectrum) {
  PointRow row;
  row.value = value;
  const double t0 = now_seconds();
  try {
    if (axis == "eta") {
      const CutProbe p = corner_cut_probe(value, base.basis.degree);
      row.eta = value;
      row.lambda_min = p.lambda_min;
      row.lambda_max = p.lambda_max;
      row.kappa = p.kappa;
      row.kappa_jacobi = p.kappa_jacobi;
    } else {
      const CaseConfig cfg = point_config(base, axis, value);
      const BuiltCase bc = build_case(cfg);
      row.n = bc.space->n();
      row.eta = min_volume_fraction(*bc.tm, cfg.quadrature);
      const MgHierarchy mg = MgHierarchy::build(bc.space, bc.op.A, cfg.mg.levels, cfg.smoother);
      const Preconditioner precond = [&mg](const VecX& r) { return mg.apply(r); };
      auto [x, rep] = cfg.solver.type == "pcg"
                          ? pcg(bc.op.A, bc.op.b, precond, cfg.solver.tol, cfg.solver.maxit)
                          : richardson(bc.op.A, bc.op.b, precond, cfg.solver.tol,
                                       cfg.solver.maxit);
      (void)x;
      row.iterations = rep.iterations;
      if (with_spectrum) {
        const SpMat& A = bc.op.A;
        const SpectrumResult sr = dense_spectrum(
            [&](const VecX& v) { return VecX(mg.apply(A * v)); }, bc.space->n());
        row.lambda_min = sr.lambda_min;
        row.lambda_max = sr.lambda_max;
        row.kappa = sr.kappa;
      }
    }
  } catch (...) {
    row.error = current_error_message();
  }
  row.seconds = now_seconds() - t0;
  return row;
}

int cmd_sweep(const CaseConfig& cfg, const RunOptions& opt) {
  if (opt.axis != "grid" && opt.axis != "levels" && opt.axis != "depth" && opt.axis != "eta")
    throw ConfigError("sweep: axis must be one of grid, levels, depth, eta");
  if (opt.values.empty()) throw ConfigError("sweep: no values given");

  const double t0 = now_seconds();
  std::vector<PointRow> rows(opt.values.size());
  const int jobs = std::max(1, std::min(opt.jobs, worker_threads()));
  if (jobs == 1 || rows.size() == 1) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      rows[i] = run_point(cfg, opt.axis, opt.values[i], opt.sweep_spectrum);
  } else {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= rows.size()) break;
        rows[i] = run_point(cfg, opt.axis, opt.values[i], opt.sweep_spectrum);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  const double total = now_seconds() - t0;

  const auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  const auto cell_int = [](long v) { return v < 0 ? std::string() : std::to_string(v); };
  auto out = open_artifact(opt.out_prefix + ".csv", true);
  out << "value,n,eta,iterations,lambda_min,lambda_max,kappa,kappa_jacobi,status\n";
  for (const PointRow& r : rows)
    out << format_double(r.value) << "," << cell_int(r.n) << "," << cell(r.eta) << ","
        << cell_int(r.iterations) << "," << cell(r.lambda_min) << "," << cell(r.lambda_max) << ","
        << cell(r.kappa) << "," << cell(r.kappa_jacobi) << ","
        << (r.error.empty() ? "ok" : "error: " + sanitize(r.error)) << "\n";
  out.close();

  json j = run_metadata(cfg, opt);
  j["axis"] = opt.axis;
  j["values"] = opt.values;
  j["jobs"] = jobs;
  j["seconds"] = total;
  json points = json::array();
  for (const PointRow& r : rows) {
    json p;
    p["value"] = r.value;
    if (r.n >= 0) p["n"] = r.n;
    if (!std::isnan(r.eta)) p["eta"] = r.eta;
    if (r.iterations >= 0) p["iterations"] = r.iterations;
    if (!std::isnan(r.lambda_min)) p["lambda_min"] = r.lambda_min;
    if (!std::isnan(r.lambda_max)) p["lambda_max"] = r.lambda_max;
    if (!std::isnan(r.kappa)) p["kappa"] = r.kappa;
    if (!std::isnan(r.kappa_jacobi)) p["kappa_jacobi"] = r.kappa_jacobi;
    p["seconds"] = r.seconds;
    if (!r.error.empty()) p["error"] = r.error;
    points.push_back(std::move(p));
  }
  j["points"] = std::move(points);
  write_json(opt.out_prefix + ".json", j);

  int failed = 0;
  for (const PointRow& r : rows) {
    std::cout << opt.axis << " = " << format_double(r.value) << ": ";
    if (!r.error.empty()) {
      std::cout << "error: " << r.error << "\n";
      ++failed;
      continue;
    }
    if (r.iterations >= 0) std::cout << r.iterations << " iterations, ";
    if (!std::isnan(r.kappa)) std::cout << "kappa = " << format_double(r.kappa) << ", ";
    std::cout << format_double(r.seconds) << " s\n";
  }
  std::cout << "artifacts: " << opt.out_prefix << ".csv, " << opt.out_prefix << ".json\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// shared building blocks
// ---------------------------------------------------------------------------

HierarchicalMesh build_mesh(const CaseConfig& cfg) {
  EmbeddingGrid grid;
  grid.origin = cfg.mesh.origin;
  grid.extent = cfg.mesh.extent;
  grid.resolution = cfg.mesh.resolution;
  HierarchicalMesh mesh = HierarchicalMesh::uniform(grid);
  for (const Box& b : cfg.mesh.refine) mesh.refine_by_box(b);
  return mesh;
}

ProblemDef problem_def(const CaseConfig& cfg) {
  ProblemDef def;
  def.pde = cfg.problem.pde;
  def.lambda = cfg.problem.lambda;
  def.mu = cfg.problem.mu;
  def.body_force = constant_field(cfg.problem.body_force);
  def.beta_lambda = cfg.problem.beta_lambda;
  def.beta_mu = cfg.problem.beta_mu;
  for (const auto& pc : cfg.problem.boundary) {
    BoundaryPiece piece;
    piece.kind = pc.kind;
    piece.box = pc.box;
    if (pc.where) piece.where = parse_levelset(*pc.where);
    piece.value = constant_field(pc.value);
    def.pieces.push_back(std::move(piece));
  }
  return def;
}

BuiltCase build_case(const CaseConfig& cfg) {
  const double t0 = now_seconds();
  BuiltCase bc;
  bc.tm = trim(build_mesh(cfg), parse_levelset(cfg.geometry), cfg.quadrature.classify_depth);
  bc.space = std::make_shared<const FunctionSpace>(
      build_space(bc.tm, cfg.basis.family, cfg.basis.degree, cfg.basis.components));
  bc.op = assemble(*bc.space, problem_def(cfg), cfg.quadrature);
  bc.assemble_seconds = now_seconds() - t0;
  return bc;
}

std::optional<ElementId> locate_point(const TrimmedMesh& tm, const Vec2& p) {
  const EmbeddingGrid& g = tm.mesh.grid();
  const Vec2 rel = p - g.origin;
  if (rel.x() < 0 || rel.y() < 0 || rel.x() > g.extent.x() || rel.y() > g.extent.y()) return {};
  for (int level = tm.mesh.max_level(); level >= 0; --level) {
    const Vec2 d = g.cell_size(level);
    const ElementId e{level,
                      std::min(g.cells_x(level) - 1, static_cast<int>(rel.x() / d.x())),
                      std::min(g.cells_y(level) - 1, static_cast<int>(rel.y() / d.y()))};
    if (!tm.mesh.is_active(e)) continue;
    if (tm.tag(e) == ElemTag::Outside) return {};
    return e;
  }
  return {};
}

VecX sample_field(const FunctionSpace& space, const VecX& x, const Vec2& p) {
  const TrimmedMesh& tm = *space.tm;
  if (tm.ls(p) < 0) return {};
  const auto e = locate_point(tm, p);
  if (!e) return {};
  const Box b = tm.mesh.grid().cell_box(e->level, e->ix, e->iy);
  const Vec2 ref((p.x() - b.lo.x()) / b.size().x(), (p.y() - b.lo.y()) / b.size().y());
  const BasisEval be = evaluate_basis(space, *e, ref);
  VecX out = VecX::Zero(space.components);
  for (std::size_t r = 0; r < be.anchors->size(); ++r)
    for (int comp = 0; comp < space.components; ++comp)
      out[comp] += be.values[static_cast<int>(r)] * x[space.dof_of((*be.anchors)[r], comp)];
  return out;
}

int run_case(const CaseConfig& cfg, const RunOptions& opt) {
  try {
    if (opt.subcommand == "print-config") return cmd_print_config(cfg);
    if (opt.subcommand == "quadrature-check") return cmd_quadrature_check(cfg, opt);
    if (opt.subcommand == "solve") return cmd_solve(cfg, opt);
    if (opt.subcommand == "spectrum") return cmd_spectrum(cfg, opt);
    if (opt.subcommand == "sweep") return cmd_sweep(cfg, opt);
    throw ConfigError("unknown subcommand: " + opt.subcommand);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ResolutionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const EmptyDomain& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const TooLarge& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Breakdown& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (...) {
    std::cerr << "error: " << current_error_message() << "\n";
    return 1;
  }
}

}  // namespace immergrid
