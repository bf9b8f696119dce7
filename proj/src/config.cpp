#include "immergrid/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace immergrid {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// ---------------------------------------------------------------------------
// Level-set expressions
// ---------------------------------------------------------------------------

namespace {

struct ExprParser {
  const std::string& s;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("level-set expression: " + msg + " at offset " + std::to_string(pos) +
                      " in \"" + s + "\"");
  }
  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  std::string ident() {
    skip();
    std::size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_' || s[pos] == '-'))
      ++pos;
    if (pos == start) fail("expected a primitive name");
    return s.substr(start, pos - start);
  }
  double number() {
    skip();
    const char* begin = s.c_str() + pos;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(v)) fail("expected a finite number");
    pos += static_cast<std::size_t>(end - begin);
    return v;
  }
  std::vector<double> numbers(int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
      if (i) expect(',');
      out.push_back(number());
    }
    return out;
  }

  LevelSet expr() {
    const std::string name = ident();
    expect('(');
    LevelSet out;
    if (name == "union" || name == "intersect") {
      out = expr();
      expect(',');
      out = name == "union" ? unite(out, expr()) : intersect(out, expr());
      while (eat(',')) out = name == "union" ? unite(out, expr()) : intersect(out, expr());
    } else if (name == "complement") {
      out = complement(expr());
    } else if (name == "affine") {
      const auto a = numbers(6);
      expect(',');
      Eigen::Matrix2d m;
      m << a[0], a[1], a[2], a[3];
      out = expr().affine(m, Vec2(a[4], a[5]));
    } else if (name == "constant") {
      out = LevelSet::constant(number());
    } else if (name == "halfplane") {
      const auto a = numbers(3);
      out = LevelSet::halfplane(a[0], a[1], a[2]);
    } else if (name == "disc") {
      const auto a = numbers(3);
      if (a[2] <= 0) fail("disc radius must be positive");
      out = LevelSet::disc(a[0], a[1], a[2]);
    } else if (name == "star") {
      const auto a = numbers(5);
      const int k = static_cast<int>(std::lround(a[4]));
      if (a[4] != k || k < 1) fail("star lobe count must be a positive integer");
      out = LevelSet::star(a[0], a[1], a[2], a[3], k);
    } else if (name == "box") {
      const auto a = numbers(4);
      if (!(a[2] > a[0] && a[3] > a[1])) fail("box corners must be ordered");
      out = LevelSet::box(a[0], a[1], a[2], a[3]);
    } else {
      fail("unknown primitive '" + name + "'");
    }
    expect(')');
    return out;
  }
};

}  // namespace

LevelSet parse_levelset(const std::string& expression) {
  ExprParser p{expression};
  LevelSet ls = p.expr();
  p.skip();
  if (p.pos != expression.size()) p.fail("trailing characters");
  return ls;
}

// ---------------------------------------------------------------------------
// TOML subset
// ---------------------------------------------------------------------------

namespace {

struct Node {
  enum class Kind { Table, Array, String, Number, Boolean };
  Kind kind = Kind::Table;
  std::map<std::string, Node> table;
  std::vector<Node> array;
  std::string str;
  double number = 0.0;
  bool boolean = false;
  int line = 0;
  mutable bool used = false;
};

const char* kind_name(Node::Kind k) {
  switch (k) {
    case Node::Kind::Table: return "a table";
    case Node::Kind::Array: return "an array";
    case Node::Kind::String: return "a string";
    case Node::Kind::Number: return "a number";
    case Node::Kind::Boolean: return "a boolean";
  }
  return "?";
}

class TomlParser {
 public:
  explicit TomlParser(const std::string& src) : src_(src) {}

  Node parse() {
    Node root;
    Node* current = &root;
    for (;;) {
      skip_blank();
      if (pos_ >= src_.size()) break;
      if (src_[pos_] == '[')
        current = header(root);
      else
        key_value(*current);
    }
    return root;
  }

 private:
  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> seen_headers_;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
  }
  void skip_inline() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '#')
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
  }
  void skip_blank() {
    for (;;) {
      skip_inline();
      if (pos_ < src_.size() && (src_[pos_] == '\n' || src_[pos_] == '\r')) {
        if (src_[pos_] == '\n') ++line_;
        ++pos_;
        continue;
      }
      break;
    }
  }
  void end_of_line() {
    skip_inline();
    if (pos_ >= src_.size()) return;
    if (src_[pos_] == '\r') ++pos_;
    if (pos_ >= src_.size()) return;
    if (src_[pos_] != '\n') fail("expected end of line");
  }

  std::string bare_key() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                  src_[pos_] == '_' || src_[pos_] == '-'))
      ++pos_;
    if (pos_ == start) fail("expected a key");
    return src_.substr(start, pos_ - start);
  }
  std::vector<std::string> key_path() {
    std::vector<std::string> parts{bare_key()};
    skip_inline();
    while (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      skip_inline();
      parts.push_back(bare_key());
      skip_inline();
    }
    return parts;
  }

  // Walks/creates tables along the path; descends into the last element of
  // any array-of-tables encountered on the way.
  Node* descend(Node* t, const std::string& key) {
    Node& child = t->table[key];
    if (child.line == 0) {
      child.line = line_;
      child.kind = Node::Kind::Table;
    }
    if (child.kind == Node::Kind::Array) {
      if (child.array.empty() || child.array.back().kind != Node::Kind::Table)
        fail("'" + key + "' is not a table");
      return &child.array.back();
    }
    if (child.kind != Node::Kind::Table) fail("'" + key + "' is not a table");
    return &child;
  }

  Node* header(Node& root) {
    ++pos_;  // '['
    const bool array_of_tables = pos_ < src_.size() && src_[pos_] == '[';
    if (array_of_tables) ++pos_;
    skip_inline();
    const auto parts = key_path();
    skip_inline();
    if (pos_ >= src_.size() || src_[pos_] != ']') fail("expected ']'");
    ++pos_;
    if (array_of_tables) {
      if (pos_ >= src_.size() || src_[pos_] != ']') fail("expected ']]'");
      ++pos_;
    }
    end_of_line();

    Node* t = &root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) t = descend(t, parts[i]);
    Node& last = t->table[parts.back()];
    if (last.line == 0) last.line = line_;
    if (array_of_tables) {
      if (last.kind == Node::Kind::Table && last.table.empty())
        last.kind = Node::Kind::Array;
      if (last.kind != Node::Kind::Array) fail("'" + parts.back() + "' is not an array of tables");
      Node elem;
      elem.kind = Node::Kind::Table;
      elem.line = line_;
      last.array.push_back(std::move(elem));
      return &last.array.back();
    }
    std::string joined;
    for (const auto& p : parts) joined += (joined.empty() ? "" : ".") + p;
    if (!seen_headers_.insert(joined).second) fail("duplicate table [" + joined + "]");
    if (last.kind != Node::Kind::Table) fail("'" + parts.back() + "' is not a table");
    return &last;
  }

  void key_value(Node& current) {
    const auto parts = key_path();
    skip_inline();
    if (pos_ >= src_.size() || src_[pos_] != '=') fail("expected '='");
    ++pos_;
    skip_inline();
    Node v = value();
    end_of_line();

    Node* t = &current;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) t = descend(t, parts[i]);
    auto [it, inserted] = t->table.emplace(parts.back(), std::move(v));
    if (!inserted) fail("duplicate key '" + parts.back() + "'");
  }

  Node value() {
    if (pos_ >= src_.size()) fail("expected a value");
    const char c = src_[pos_];
    Node n;
    n.line = line_;
    if (c == '"') {
      n.kind = Node::Kind::String;
      n.str = string_value();
    } else if (c == '[') {
      n.kind = Node::Kind::Array;
      ++pos_;
      skip_blank();
      while (pos_ < src_.size() && src_[pos_] != ']') {
        n.array.push_back(value());
        skip_blank();
        if (pos_ < src_.size() && src_[pos_] == ',') {
          ++pos_;
          skip_blank();
        } else {
          break;
        }
      }
      if (pos_ >= src_.size() || src_[pos_] != ']') fail("expected ']'");
      ++pos_;
    } else if (src_.compare(pos_, 4, "true") == 0) {
      n.kind = Node::Kind::Boolean;
      n.boolean = true;
      pos_ += 4;
    } else if (src_.compare(pos_, 5, "false") == 0) {
      n.kind = Node::Kind::Boolean;
      n.boolean = false;
      pos_ += 5;
    } else {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      n.number = std::strtod(begin, &end);
      if (end == begin) fail("expected a value");
      if (!std::isfinite(n.number)) fail("numbers must be finite");
      n.kind = Node::Kind::Number;
      pos_ += static_cast<std::size_t>(end - begin);
    }
    return n;
  }

  std::string string_value() {
    ++pos_;  // '"'
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      char c = src_[pos_++];
      if (c == '\n') fail("unterminated string");
      if (c == '\\') {
        if (pos_ >= src_.size()) fail("unterminated string");
        const char e = src_[pos_++];
        switch (e) {
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          default: fail(std::string("unsupported escape '\\") + e + "'");
        }
      }
      out.push_back(c);
    }
    if (pos_ >= src_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }
};

// --- typed access, marking nodes as consumed --------------------------------

[[noreturn]] void type_fail(const std::string& path, const Node& n, const char* want) {
  throw ConfigError(path + " (line " + std::to_string(n.line) + "): expected " + want + ", got " +
                    kind_name(n.kind));
}

const Node* find(const Node& table, const std::string& key) {
  auto it = table.table.find(key);
  if (it == table.table.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

double as_number(const Node& n, const std::string& path) {
  if (n.kind != Node::Kind::Number) type_fail(path, n, "a number");
  return n.number;
}

int as_int(const Node& n, const std::string& path) {
  const double v = as_number(n, path);
  const int i = static_cast<int>(v);
  if (v != i) throw ConfigError(path + ": expected an integer, got " + format_double(v));
  return i;
}

std::string as_string(const Node& n, const std::string& path) {
  if (n.kind != Node::Kind::String) type_fail(path, n, "a string");
  return n.str;
}

std::vector<double> as_num_array(const Node& n, const std::string& path) {
  if (n.kind == Node::Kind::Number) return {n.number};  // scalar shorthand
  if (n.kind != Node::Kind::Array) type_fail(path, n, "an array of numbers");
  std::vector<double> out;
  for (const auto& e : n.array) out.push_back(as_number(e, path));
  return out;
}

std::array<double, 2> as_pair(const Node& n, const std::string& path) {
  const auto v = as_num_array(n, path);
  if (v.size() != 2) throw ConfigError(path + ": expected 2 numbers, got " + std::to_string(v.size()));
  return {v[0], v[1]};
}

Box as_box(const Node& n, const std::string& path) {
  const auto v = as_num_array(n, path);
  if (v.size() != 4)
    throw ConfigError(path + ": expected [x0, y0, x1, y1], got " + std::to_string(v.size()) +
                      " numbers");
  return {Vec2(v[0], v[1]), Vec2(v[2], v[3])};
}

// Nodes never consumed by a loader are unknown keys.
void collect_unused(const Node& n, const std::string& path, std::vector<std::string>& out) {
  for (const auto& [key, child] : n.table) {
    const std::string p = path.empty() ? key : path + "." + key;
    if (!child.used) {
      out.push_back(p);
      continue;
    }
    if (child.kind == Node::Kind::Table) collect_unused(child, p, out);
    if (child.kind == Node::Kind::Array)
      for (std::size_t i = 0; i < child.array.size(); ++i)
        if (child.array[i].kind == Node::Kind::Table) {
          if (!child.array[i].used)
            out.push_back(p + "[" + std::to_string(i) + "]");
          else
            collect_unused(child.array[i], p + "[" + std::to_string(i) + "]", out);
        }
  }
}

// --- enum names --------------------------------------------------------------

template <typename T>
T named(const std::string& s, std::initializer_list<std::pair<const char*, T>> table,
        const std::string& path) {
  std::string options;
  for (const auto& [name, v] : table) {
    if (s == name) return v;
    options += options.empty() ? "" : ", ";
    options += name;
  }
  throw ConfigError(path + ": unknown value \"" + s + "\" (one of: " + options + ")");
}

Family family_of(const std::string& s, const std::string& path) {
  return named<Family>(s,
                       {{"lagrange", Family::Lagrange},
                        {"bspline", Family::Bspline},
                        {"thb", Family::THB}},
                       path);
}
const char* family_name(Family f) {
  switch (f) {
    case Family::Lagrange: return "lagrange";
    case Family::Bspline: return "bspline";
    case Family::THB: return "thb";
  }
  return "?";
}

Pde pde_of(const std::string& s, const std::string& path) {
  return named<Pde>(s, {{"poisson", Pde::Poisson}, {"elasticity", Pde::LinearElasticity}}, path);
}
const char* pde_name(Pde p) { return p == Pde::Poisson ? "poisson" : "elasticity"; }

BcKind bc_of(const std::string& s, const std::string& path) {
  return named<BcKind>(s,
                       {{"dirichlet", BcKind::Dirichlet},
                        {"neumann", BcKind::Neumann},
                        {"normal-dirichlet", BcKind::NormalDirichletTangentialNeumann}},
                       path);
}
const char* bc_name(BcKind k) {
  switch (k) {
    case BcKind::Dirichlet: return "dirichlet";
    case BcKind::Neumann: return "neumann";
    case BcKind::NormalDirichletTangentialNeumann: return "normal-dirichlet";
  }
  return "?";
}

SmootherKind smoother_of(const std::string& s, const std::string& path) {
  return named<SmootherKind>(s,
                             {{"jacobi", SmootherKind::Jacobi},
                              {"gauss-seidel", SmootherKind::GaussSeidel},
                              {"additive-schwarz", SmootherKind::AdditiveSchwarz},
                              {"multiplicative-schwarz", SmootherKind::MultiplicativeSchwarz}},
                             path);
}
const char* smoother_name(SmootherKind k) {
  switch (k) {
    case SmootherKind::Jacobi: return "jacobi";
    case SmootherKind::GaussSeidel: return "gauss-seidel";
    case SmootherKind::AdditiveSchwarz: return "additive-schwarz";
    case SmootherKind::MultiplicativeSchwarz: return "multiplicative-schwarz";
  }
  return "?";
}

// --- section loaders ----------------------------------------------------------

void require_table(const Node& n, const std::string& path) {
  if (n.kind != Node::Kind::Table) type_fail(path, n, "a table");
}

void load_geometry(const Node* t, CaseConfig& cfg) {
  if (!t) return;
  require_table(*t, "geometry");
  if (const Node* n = find(*t, "expression")) cfg.geometry = as_string(*n, "geometry.expression");
}

void load_mesh(const Node* t, MeshConfig& m) {
  if (!t) return;
  require_table(*t, "mesh");
  if (const Node* n = find(*t, "origin")) {
    const auto p = as_pair(*n, "mesh.origin");
    m.origin = Vec2(p[0], p[1]);
  }
  if (const Node* n = find(*t, "extent")) {
    const auto p = as_pair(*n, "mesh.extent");
    m.extent = Vec2(p[0], p[1]);
  }
  if (const Node* n = find(*t, "resolution")) {
    if (n->kind == Node::Kind::Number) {
      m.resolution = {as_int(*n, "mesh.resolution"), as_int(*n, "mesh.resolution")};
    } else {
      if (n->kind != Node::Kind::Array || n->array.size() != 2)
        throw ConfigError("mesh.resolution: expected an integer or [nx, ny]");
      m.resolution = {as_int(n->array[0], "mesh.resolution"),
                      as_int(n->array[1], "mesh.resolution")};
    }
  }
  if (const Node* n = find(*t, "refine")) {
    if (n->kind != Node::Kind::Array) type_fail("mesh.refine", *n, "an array of boxes");
    m.refine.clear();
    for (std::size_t i = 0; i < n->array.size(); ++i)
      m.refine.push_back(as_box(n->array[i], "mesh.refine[" + std::to_string(i) + "]"));
  }
}

void load_quadrature(const Node* t, QuadratureConfig& q) {
  if (!t) return;
  require_table(*t, "quadrature");
  if (const Node* n = find(*t, "depth")) q.depth = as_int(*n, "quadrature.depth");
  if (const Node* n = find(*t, "gauss_order")) q.gauss_order = as_int(*n, "quadrature.gauss_order");
  if (const Node* n = find(*t, "classify_depth"))
    q.classify_depth = as_int(*n, "quadrature.classify_depth");
  if (const Node* n = find(*t, "edge_tol")) q.edge_tol = as_number(*n, "quadrature.edge_tol");
}

// basis.degree is the one key a config file must state explicitly: the degree
// drives quadrature order, block sizes, and DOF counts, so silently defaulting
// it makes runs too easy to misread.
void load_basis(const Node* t, BasisConfig& b) {
  if (!t) throw ConfigError("basis.degree is required (add a [basis] table with degree)");
  require_table(*t, "basis");
  if (const Node* n = find(*t, "family"))
    b.family = family_of(as_string(*n, "basis.family"), "basis.family");
  if (const Node* n = find(*t, "degree"))
    b.degree = as_int(*n, "basis.degree");
  else
    throw ConfigError("basis.degree is required");
  if (const Node* n = find(*t, "components")) b.components = as_int(*n, "basis.components");
}

void load_problem(const Node* t, ProblemConfig& p) {
  if (!t) return;
  require_table(*t, "problem");
  if (const Node* n = find(*t, "pde")) p.pde = pde_of(as_string(*n, "problem.pde"), "problem.pde");
  if (const Node* n = find(*t, "lambda")) p.lambda = as_number(*n, "problem.lambda");
  if (const Node* n = find(*t, "mu")) p.mu = as_number(*n, "problem.mu");
  if (const Node* n = find(*t, "body_force")) p.body_force = as_num_array(*n, "problem.body_force");
  if (const Node* n = find(*t, "beta_lambda")) p.beta_lambda = as_number(*n, "problem.beta_lambda");
  if (const Node* n = find(*t, "beta_mu")) p.beta_mu = as_number(*n, "problem.beta_mu");
  if (const Node* n = find(*t, "boundary")) {
    if (n->kind != Node::Kind::Array) type_fail("problem.boundary", *n, "an array of tables");
    p.boundary.clear();
    for (std::size_t i = 0; i < n->array.size(); ++i) {
      const Node& e = n->array[i];
      const std::string path = "problem.boundary[" + std::to_string(i) + "]";
      require_table(e, path);
      e.used = true;
      BoundaryPieceConfig piece;
      if (const Node* k = find(e, "kind")) piece.kind = bc_of(as_string(*k, path + ".kind"), path + ".kind");
      if (const Node* k = find(e, "box")) piece.box = as_box(*k, path + ".box");
      if (const Node* k = find(e, "where")) piece.where = as_string(*k, path + ".where");
      if (const Node* k = find(e, "value")) piece.value = as_num_array(*k, path + ".value");
      p.boundary.push_back(std::move(piece));
    }
  }
}

void load_smoother(const Node* t, SmootherConfig& s) {
  if (!t) return;
  require_table(*t, "smoother");
  if (const Node* n = find(*t, "kind"))
    s.kind = smoother_of(as_string(*n, "smoother.kind"), "smoother.kind");
  if (const Node* n = find(*t, "gamma")) s.gamma = as_number(*n, "smoother.gamma");
  if (const Node* n = find(*t, "filter_ratio")) s.filter_ratio = as_number(*n, "smoother.filter_ratio");
}

void load_mg(const Node* t, MgConfig& m) {
  if (!t) return;
  require_table(*t, "mg");
  if (const Node* n = find(*t, "levels")) m.levels = as_int(*n, "mg.levels");
}

void load_solver(const Node* t, SolverConfig& s) {
  if (!t) return;
  require_table(*t, "solver");
  if (const Node* n = find(*t, "type")) {
    s.type = as_string(*n, "solver.type");
    named<int>(s.type, {{"pcg", 0}, {"richardson", 1}}, "solver.type");
  }
  if (const Node* n = find(*t, "tol")) s.tol = as_number(*n, "solver.tol");
  if (const Node* n = find(*t, "maxit")) s.maxit = as_int(*n, "solver.maxit");
}

}  // namespace

// ---------------------------------------------------------------------------
// CaseConfig
// ---------------------------------------------------------------------------

CaseConfig parse_case_config(const std::string& toml_text) {
  const Node root = TomlParser(toml_text).parse();
  root.used = true;

  CaseConfig cfg;
  load_geometry(find(root, "geometry"), cfg);
  load_mesh(find(root, "mesh"), cfg.mesh);
  load_quadrature(find(root, "quadrature"), cfg.quadrature);
  load_basis(find(root, "basis"), cfg.basis);
  // Unless stated, the quadrature order follows the basis degree: p+1 points
  // per axis integrate the degree-2p stiffness integrands exactly.
  const Node* quad = find(root, "quadrature");
  if (!quad || !find(*quad, "gauss_order")) cfg.quadrature.gauss_order = cfg.basis.degree + 1;
  load_problem(find(root, "problem"), cfg.problem);
  load_smoother(find(root, "smoother"), cfg.smoother);
  load_mg(find(root, "mg"), cfg.mg);
  load_solver(find(root, "solver"), cfg.solver);
  if (const Node* n = find(root, "seed")) {
    const double v = as_number(*n, "seed");
    if (v < 0 || v != std::floor(v)) throw ConfigError("seed: expected a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(v);
  }

  std::vector<std::string> unknown;
  collect_unused(root, "", unknown);
  if (!unknown.empty()) {
    std::string all;
    for (const auto& k : unknown) all += (all.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config key(s): " + all);
  }

  validate(cfg);
  return cfg;
}

CaseConfig load_case_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case_config(ss.str());
}

void validate(const CaseConfig& cfg) {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  try {
    parse_levelset(cfg.geometry);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("geometry.expression: ") + e.what());
  }

  check(cfg.mesh.extent.x() > 0 && cfg.mesh.extent.y() > 0, "mesh.extent: must be positive");
  check(cfg.mesh.resolution[0] >= 1 && cfg.mesh.resolution[1] >= 1,
        "mesh.resolution: must be >= 1");
  for (const Box& b : cfg.mesh.refine)
    check(b.hi.x() > b.lo.x() && b.hi.y() > b.lo.y(), "mesh.refine: box corners must be ordered");

  check(cfg.quadrature.depth >= 0, "quadrature.depth: must be >= 0");
  check(cfg.quadrature.gauss_order >= 1, "quadrature.gauss_order: must be >= 1");
  check(cfg.quadrature.classify_depth >= 0, "quadrature.classify_depth: must be >= 0");
  check(cfg.quadrature.edge_tol > 0, "quadrature.edge_tol: must be positive");

  check(cfg.basis.degree >= 1, "basis.degree: must be >= 1");
  check(cfg.basis.components == 1 || cfg.basis.components == 2,
        "basis.components: must be 1 or 2");
  const int expected = cfg.problem.pde == Pde::Poisson ? 1 : 2;
  check(cfg.basis.components == expected,
        std::string("basis.components: ") + pde_name(cfg.problem.pde) + " needs " +
            std::to_string(expected) + " component(s)");
  check(cfg.basis.family == Family::THB || cfg.mesh.refine.empty(),
        "mesh.refine: local refinement requires basis.family = \"thb\"");

  if (cfg.problem.pde == Pde::LinearElasticity)
    check(cfg.problem.lambda > 0 && cfg.problem.mu > 0,
          "problem.lambda/mu: must be positive for elasticity");
  check(cfg.problem.beta_lambda >= 0 && cfg.problem.beta_mu >= 0,
        "problem.beta_lambda/beta_mu: must be >= 0 (0 = automatic)");
  const auto check_field = [&](const std::vector<double>& v, const std::string& what) {
    check(v.empty() || static_cast<int>(v.size()) == cfg.basis.components,
          what + ": expected " + std::to_string(cfg.basis.components) + " component(s), got " +
              std::to_string(v.size()));
  };
  check_field(cfg.problem.body_force, "problem.body_force");
  bool any_dirichlet = false;
  for (std::size_t i = 0; i < cfg.problem.boundary.size(); ++i) {
    const auto& piece = cfg.problem.boundary[i];
    const std::string path = "problem.boundary[" + std::to_string(i) + "]";
    check_field(piece.value, path + ".value");
    if (piece.box)
      check(piece.box->hi.x() > piece.box->lo.x() && piece.box->hi.y() > piece.box->lo.y(),
            path + ".box: corners must be ordered");
    if (piece.where) {
      try {
        parse_levelset(*piece.where);
      } catch (const ConfigError& e) {
        throw ConfigError(path + ".where: " + e.what());
      }
    }
    any_dirichlet = any_dirichlet || piece.kind != BcKind::Neumann;
  }
  check(any_dirichlet, "problem.boundary: at least one Dirichlet-type piece is required");

  check(cfg.smoother.gamma >= 0, "smoother.gamma: must be >= 0 (0 = automatic)");
  check(cfg.smoother.filter_ratio >= 0, "smoother.filter_ratio: must be >= 0");

  check(cfg.mg.levels >= 1, "mg.levels: must be >= 1");

  check(cfg.solver.type == "pcg" || cfg.solver.type == "richardson",
        "solver.type: must be \"pcg\" or \"richardson\"");
  check(cfg.solver.tol > 0, "solver.tol: must be positive");
  check(cfg.solver.maxit >= 1, "solver.maxit: must be >= 1");
}

std::string print_config(const CaseConfig& cfg) {
  std::ostringstream out;
  const auto num = [](double v) { return format_double(v); };
  const auto arr = [&](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
    return s + "]";
  };
  const auto field = [&](std::vector<double> v) {
    if (v.empty()) v.assign(cfg.basis.components, 0.0);
    return arr(v);
  };
  const auto boxv = [&](const Box& b) {
    return arr({b.lo.x(), b.lo.y(), b.hi.x(), b.hi.y()});
  };

  out << "seed = " << cfg.seed << "\n\n";
  out << "[geometry]\n";
  out << "expression = \"" << cfg.geometry << "\"\n\n";

  out << "[mesh]\n";
  out << "origin = " << arr({cfg.mesh.origin.x(), cfg.mesh.origin.y()}) << "\n";
  out << "extent = " << arr({cfg.mesh.extent.x(), cfg.mesh.extent.y()}) << "\n";
  out << "resolution = [" << cfg.mesh.resolution[0] << ", " << cfg.mesh.resolution[1] << "]\n";
  out << "refine = [";
  for (std::size_t i = 0; i < cfg.mesh.refine.size(); ++i)
    out << (i ? ", " : "") << boxv(cfg.mesh.refine[i]);
  out << "]\n\n";

  out << "[quadrature]\n";
  out << "depth = " << cfg.quadrature.depth << "\n";
  out << "gauss_order = " << cfg.quadrature.gauss_order << "\n";
  out << "classify_depth = " << cfg.quadrature.classify_depth << "\n";
  out << "edge_tol = " << num(cfg.quadrature.edge_tol) << "\n\n";

  out << "[basis]\n";
  out << "family = \"" << family_name(cfg.basis.family) << "\"\n";
  out << "degree = " << cfg.basis.degree << "\n";
  out << "components = " << cfg.basis.components << "\n\n";

  out << "[problem]\n";
  out << "pde = \"" << pde_name(cfg.problem.pde) << "\"\n";
  out << "lambda = " << num(cfg.problem.lambda) << "\n";
  out << "mu = " << num(cfg.problem.mu) << "\n";
  out << "body_force = " << field(cfg.problem.body_force) << "\n";
  out << "beta_lambda = " << num(cfg.problem.beta_lambda) << "\n";
  out << "beta_mu = " << num(cfg.problem.beta_mu) << "\n";
  for (const auto& piece : cfg.problem.boundary) {
    out << "\n[[problem.boundary]]\n";
    out << "kind = \"" << bc_name(piece.kind) << "\"\n";
    if (piece.box) out << "box = " << boxv(*piece.box) << "\n";
    if (piece.where) out << "where = \"" << *piece.where << "\"\n";
    out << "value = " << field(piece.value) << "\n";
  }
  out << "\n[smoother]\n";
  out << "kind = \"" << smoother_name(cfg.smoother.kind) << "\"\n";
  out << "gamma = " << num(cfg.smoother.gamma) << "\n";
  out << "filter_ratio = " << num(cfg.smoother.filter_ratio) << "\n\n";

  out << "[mg]\n";
  out << "levels = " << cfg.mg.levels << "\n\n";

  out << "[solver]\n";
  out << "type = \"" << cfg.solver.type << "\"\n";
  out << "tol = " << num(cfg.solver.tol) << "\n";
  out << "maxit = " << cfg.solver.maxit << "\n";
  return out.str();
}

}  // namespace immergrid
