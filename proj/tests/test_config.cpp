#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "immergrid/common.hpp"
#include "immergrid/config.hpp"

using namespace immergrid;
using doctest::Contains;

namespace {

// Every config must state basis.degree; supply it as a top-level dotted key so
// test bodies stay free to open (or reopen) any table they like.
CaseConfig parse(const std::string& body) {
  return parse_case_config("basis.degree = 2\n" + body);
}

std::string repo_file(const std::string& rel) {
  std::string dir = __FILE__;
  dir.erase(dir.find_last_of('/'));
  return dir + "/../" + rel;
}

}  // namespace

TEST_CASE("a minimal config keeps the documented defaults") {
  const CaseConfig c = parse_case_config("[basis]\ndegree = 2\n");
  CHECK(c.geometry == "star(0, 0, 0.5, 0.1, 5)");
  CHECK(c.mesh.origin.x() == -1.0);
  CHECK(c.mesh.origin.y() == -1.0);
  CHECK(c.mesh.extent.x() == 2.0);
  CHECK(c.mesh.extent.y() == 2.0);
  CHECK(c.mesh.resolution == std::array<int, 2>{16, 16});
  CHECK(c.mesh.refine.empty());
  CHECK(c.quadrature.depth == 3);
  CHECK(c.quadrature.gauss_order == 3);  // degree + 1
  CHECK(c.quadrature.classify_depth == 2);
  CHECK(c.quadrature.edge_tol == 1e-12);
  CHECK(c.basis.family == Family::Lagrange);
  CHECK(c.basis.degree == 2);
  CHECK(c.basis.components == 1);
  CHECK(c.problem.pde == Pde::Poisson);
  CHECK(c.problem.lambda == 1.0);
  CHECK(c.problem.mu == 1.0);
  CHECK(c.problem.body_force.empty());
  REQUIRE(c.problem.boundary.size() == 1);
  CHECK(c.problem.boundary[0].kind == BcKind::Dirichlet);
  CHECK(!c.problem.boundary[0].box);
  CHECK(!c.problem.boundary[0].where);
  CHECK(c.problem.boundary[0].value.empty());
  CHECK(c.problem.beta_lambda == 0.0);
  CHECK(c.problem.beta_mu == 0.0);
  CHECK(c.smoother.kind == SmootherKind::MultiplicativeSchwarz);
  CHECK(c.smoother.gamma == 0.0);
  CHECK(c.smoother.filter_ratio == 1e-16);
  CHECK(c.mg.levels == 2);
  CHECK(c.solver.type == "pcg");
  CHECK(c.solver.tol == 1e-10);
  CHECK(c.solver.maxit == 1000);
  CHECK(c.seed == 1);
}

TEST_CASE("the quadrature order follows the degree unless stated") {
  CHECK(parse_case_config("[basis]\ndegree = 3\n").quadrature.gauss_order == 4);
  CHECK(parse_case_config("[basis]\ndegree = 1\n").quadrature.gauss_order == 2);
  const CaseConfig c =
      parse_case_config("[basis]\ndegree = 3\n[quadrature]\ngauss_order = 2\n");
  CHECK(c.quadrature.gauss_order == 2);
}

TEST_CASE("basis.degree is the one required key") {
  CHECK_THROWS_WITH_AS(parse_case_config(""), Contains("basis.degree is required"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_case_config("[basis]\nfamily = \"bspline\"\n"),
                       Contains("basis.degree is required"), ConfigError);
}

TEST_CASE("parsing covers the full TOML subset") {
  const CaseConfig c = parse(R"toml(
# full-width comment
seed = 42
basis.family = "thb"
basis.components = 2
quadrature.depth = 5

[geometry]
expression = "disc(0, 0, 0.7)"   # trailing comment

[mesh]
origin = [-2, -2]
extent = [4, 4]
resolution = 32
refine = [[-0.5, -0.5, 0.5, 0.5],
          [-0.25, -0.25,
           0.25, 0.25]]

[problem]
pde = "elasticity"
lambda = 1.25
mu = 0.5
body_force = [0, -1]

[[problem.boundary]]
kind = "neumann"
box = [-2.1, -2.1, -1.9, 2.1]
value = [1, 0]

[[problem.boundary]]
kind = "normal-dirichlet"
where = "halfplane(1, 0, -1.5)"

[[problem.boundary]]
kind = "dirichlet"

[smoother]
kind = "additive-schwarz"
gamma = 0.25

[solver]
type = "richardson"
maxit = 500
)toml");
  CHECK(c.seed == 42);
  CHECK(c.geometry == "disc(0, 0, 0.7)");
  CHECK(c.mesh.origin.x() == -2.0);
  CHECK(c.mesh.extent.y() == 4.0);
  CHECK(c.mesh.resolution == std::array<int, 2>{32, 32});
  REQUIRE(c.mesh.refine.size() == 2);
  CHECK(c.mesh.refine[1].hi.x() == 0.25);
  CHECK(c.mesh.refine[1].hi.y() == 0.25);
  CHECK(c.basis.family == Family::THB);
  CHECK(c.basis.components == 2);
  CHECK(c.quadrature.depth == 5);
  CHECK(c.problem.pde == Pde::LinearElasticity);
  CHECK(c.problem.lambda == 1.25);
  CHECK(c.problem.body_force == std::vector<double>{0.0, -1.0});
  REQUIRE(c.problem.boundary.size() == 3);
  CHECK(c.problem.boundary[0].kind == BcKind::Neumann);
  REQUIRE(c.problem.boundary[0].box);
  CHECK(c.problem.boundary[0].box->lo.x() == -2.1);
  CHECK(c.problem.boundary[0].box->hi.y() == 2.1);
  CHECK(c.problem.boundary[0].value == std::vector<double>{1.0, 0.0});
  CHECK(c.problem.boundary[1].kind == BcKind::NormalDirichletTangentialNeumann);
  REQUIRE(c.problem.boundary[1].where);
  CHECK(*c.problem.boundary[1].where == "halfplane(1, 0, -1.5)");
  CHECK(c.problem.boundary[2].kind == BcKind::Dirichlet);
  CHECK(c.smoother.kind == SmootherKind::AdditiveSchwarz);
  CHECK(c.smoother.gamma == 0.25);
  CHECK(c.solver.type == "richardson");
  CHECK(c.solver.maxit == 500);
}

TEST_CASE("resolution accepts a scalar or a pair and strings support escapes") {
  CHECK(parse("[mesh]\nresolution = [8, 24]\n").mesh.resolution ==
        std::array<int, 2>{8, 24});
  const CaseConfig c = parse("[geometry]\nexpression = \"disc(0, 0,\\t0.5)\"\n");
  CHECK(c.geometry == "disc(0, 0,\t0.5)");
  // CRLF line endings and the scalar body_force shorthand.
  const CaseConfig d = parse("[problem]\r\nbody_force = 2.5\r\n");
  CHECK(d.problem.body_force == std::vector<double>{2.5});
}

TEST_CASE("printing a config and parsing it back is the identity") {
  const char* samples[] = {
      "",
      "[geometry]\nexpression = \"union(disc(-0.3, 0, 0.4), disc(0.3, 0, 0.4))\"\n"
      "[mesh]\nresolution = [8, 12]\nrefine = [[-0.2, -0.2, 0.2, 0.2]]\n"
      "[basis]\nfamily = \"thb\"\n[quadrature]\nedge_tol = 1e-13\n",
      "basis.components = 2\n"
      "[problem]\npde = \"elasticity\"\nbody_force = [0.1, -0.9]\n"
      "[[problem.boundary]]\nkind = \"neumann\"\nbox = [-1, -1, 1, -0.5]\nvalue = [0, 1]\n"
      "[[problem.boundary]]\nkind = \"dirichlet\"\nwhere = \"halfplane(0, 1, 0.9)\"\n"
      "[smoother]\nkind = \"jacobi\"\ngamma = 0.11\n"
      "[solver]\ntype = \"richardson\"\ntol = 3e-9\nmaxit = 77\n[mg]\nlevels = 4\n",
  };
  for (const char* body : samples) {
    CAPTURE(body);
    const std::string once = print_config(parse(body));
    const std::string twice = print_config(parse_case_config(once));
    CHECK(once == twice);
  }
}

TEST_CASE("unknown keys are rejected with their dotted path") {
  CHECK_THROWS_WITH_AS(parse("junk = 1\n"), Contains("unknown config key(s): junk"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[mesh]\nspacing = 0.1\n"), Contains("mesh.spacing"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[turbo]\nenabled = true\n"), Contains("turbo"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse("[[problem.boundary]]\nkind = \"dirichlet\"\nvalues = [1]\n"),
      Contains("problem.boundary[0].values"), ConfigError);
  // All offenders are listed, not just the first.
  CHECK_THROWS_WITH_AS(parse("alpha = 1\nbeta = 2\n"), Contains("alpha, beta"), ConfigError);
}

TEST_CASE("duplicate keys and duplicate tables fail with a line number") {
  CHECK_THROWS_WITH_AS(parse("[mesh]\nresolution = 8\nresolution = 16\n"),
                       Contains("duplicate key 'resolution'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[mesh]\nresolution = 8\nresolution = 16\n"), Contains("line 4"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[mesh]\n[mesh]\n"), Contains("duplicate table [mesh]"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_case_config("[basis]\ndegree = 2\ndegree = 2\n"),
                       Contains("duplicate key 'degree'"), ConfigError);
}

TEST_CASE("malformed input reports the offending construct") {
  CHECK_THROWS_WITH_AS(parse("resolution 8\n"), Contains("expected '='"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[mesh\nresolution = 8\n"), Contains("expected ']'"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("x = \"unterminated\n"), Contains("unterminated string"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("x = [1, 2\n"), Contains("expected ']'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("x = @\n"), Contains("expected a value"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("x = 1 y = 2\n"), Contains("expected end of line"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("x = 1e999\n"), Contains("numbers must be finite"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("x = \"bad \\q escape\"\n"), Contains("unsupported escape"),
                       ConfigError);
}

TEST_CASE("values are type-checked against the schema") {
  CHECK_THROWS_WITH_AS(parse("[mesh]\nresolution = 2.5\n"),
                       Contains("mesh.resolution: expected an integer, got 2.5"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[mesh]\norigin = [1]\n"), Contains("expected 2 numbers, got 1"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[mesh]\nrefine = [[0, 0, 1]]\n"),
                       Contains("expected [x0, y0, x1, y1], got 3"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[solver]\ntol = \"tight\"\n"),
                       Contains("expected a number, got a string"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[geometry]\nexpression = 5\n"),
                       Contains("expected a string, got a number"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[problem]\nboundary = 3\n"),
                       Contains("expected an array of tables"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("mesh = 7\n[mesh]\nresolution = 8\n"), Contains("not a table"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("seed = -3\n"), Contains("seed: expected a nonnegative integer"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("seed = 1.5\n"), Contains("seed"), ConfigError);
}

TEST_CASE("level-set expressions evaluate every primitive and combinator") {
  CHECK(parse_levelset("constant(2.5)")(0.3, -0.8) == 2.5);
  // halfplane(a, b, c) = a*x + b*y + c
  CHECK(parse_levelset("halfplane(1, 0, -0.25)")(0.5, 0.0) == doctest::Approx(0.25));
  CHECK(parse_levelset("halfplane(0, -2, 0.1)")(0.4, 0.3) == doctest::Approx(-0.5));
  // disc: positive inside, signed distance
  CHECK(parse_levelset("disc(0.1, -0.2, 0.5)")(0.1, -0.2) == doctest::Approx(0.5));
  CHECK(parse_levelset("disc(0, 0, 0.5)")(0.8, 0.0) == doctest::Approx(-0.3));
  // star matches the library primitive pointwise
  const LevelSet s1 = parse_levelset("star(0.1, -0.05, 0.5, 0.1, 5)");
  const LevelSet s2 = LevelSet::star(0.1, -0.05, 0.5, 0.1, 5);
  Rng rng(7);
  for (int i = 0; i < 25; ++i) {
    const Vec2 p(rng.uniform(-1, 1), rng.uniform(-1, 1));
    CHECK(s1(p) == doctest::Approx(s2(p)).epsilon(1e-14));
  }
  const LevelSet b = parse_levelset("box(-0.5, -0.25, 0.5, 0.25)");
  CHECK(b(0.0, 0.0) > 0.0);
  CHECK(b(0.0, 0.3) < 0.0);
  CHECK(b(0.7, 0.0) < 0.0);
  // union = max, intersect = min, complement = negation; variadic forms
  CHECK(parse_levelset("union(constant(-1), constant(3), constant(2))")(0, 0) == 3.0);
  CHECK(parse_levelset("intersect(constant(-1), constant(3), constant(2))")(0, 0) == -1.0);
  CHECK(parse_levelset("complement(constant(4))")(0, 0) == -4.0);
  // affine evaluates the child at A*p + b: through A = 2I the unit disc is
  // seen at twice the radius, so its apparent boundary sits at |p| = 1/2.
  const LevelSet a = parse_levelset("affine(2, 0, 0, 2, 0, 0, disc(0, 0, 1))");
  CHECK(a(0.25, 0.0) == doctest::Approx(0.5));
  CHECK(a(0.75, 0.0) == doctest::Approx(-0.5));
  // whitespace and nesting
  const LevelSet w =
      parse_levelset("  union( disc( 0 , 0 , 0.3 ) ,\n box(0.5, 0.5, 0.9, 0.9) )");
  CHECK(w(0.0, 0.0) > 0.0);
  CHECK(w(0.7, 0.7) > 0.0);
  CHECK(w(-0.7, 0.7) < 0.0);
}

TEST_CASE("level-set expression errors carry the offset and input") {
  CHECK_THROWS_WITH_AS(parse_levelset("blob(1, 2)"), Contains("unknown primitive 'blob'"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_levelset("disc(0, 0, 0.5"), Contains("expected ')'"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_levelset("disc(0, 0, 0.5) x"), Contains("trailing characters"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_levelset("disc(0, 0, -1)"), Contains("radius must be positive"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_levelset("star(0, 0, 0.5, 0.1, 2.5)"),
                       Contains("lobe count must be a positive integer"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_levelset("star(0, 0, 0.5, 0.1, 0)"),
                       Contains("lobe count must be a positive integer"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_levelset("box(1, 0, 0, 1)"), Contains("corners must be ordered"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_levelset(""), Contains("expected a primitive name"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_levelset("disc(0, 0, inf)"), Contains("expected a finite number"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_levelset("union(disc(0, 0, 1))"), Contains("expected ','"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_levelset("disc(0, 0, -1)"), Contains("in \"disc(0, 0, -1)\""),
                       ConfigError);
}

TEST_CASE("validation enforces cross-field consistency") {
  CHECK_THROWS_WITH_AS(parse("basis.components = 2\n"), Contains("poisson needs 1 component"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[problem]\npde = \"elasticity\"\n"),
                       Contains("elasticity needs 2 component"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("basis.components = 3\n"), Contains("must be 1 or 2"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[mesh]\nrefine = [[-0.2, -0.2, 0.2, 0.2]]\n"),
                       Contains("local refinement requires basis.family = \"thb\""),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[geometry]\nexpression = \"blob(1)\"\n"),
                       Contains("geometry.expression"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[mesh]\nresolution = 0\n"), Contains("must be >= 1"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[mesh]\nextent = [-1, 2]\n"), Contains("must be positive"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_case_config("[basis]\ndegree = 0\n"),
                       Contains("basis.degree: must be >= 1"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[quadrature]\ndepth = -1\n"), Contains("quadrature.depth"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[quadrature]\nedge_tol = 0\n"), Contains("must be positive"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(
      parse("basis.components = 2\n[problem]\npde = \"elasticity\"\nlambda = -1\n"),
      Contains("must be positive for elasticity"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[problem]\nbeta_lambda = -2\n"), Contains("0 = automatic"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[problem]\nbody_force = [1, 2]\n"),
                       Contains("expected 1 component(s), got 2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[[problem.boundary]]\nkind = \"neumann\"\n"),
                       Contains("at least one Dirichlet-type piece"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse("[[problem.boundary]]\nkind = \"dirichlet\"\nbox = [1, 0, 0, 1]\n"),
      Contains("corners must be ordered"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse("[[problem.boundary]]\nkind = \"dirichlet\"\nwhere = \"wedge(1)\"\n"),
      Contains("problem.boundary[0].where"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[smoother]\ngamma = -0.5\n"), Contains("smoother.gamma"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[mg]\nlevels = 0\n"), Contains("mg.levels: must be >= 1"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[solver]\ntype = \"bicg\"\n"),
                       Contains("one of: pcg, richardson"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[solver]\ntol = 0\n"), Contains("solver.tol"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[solver]\nmaxit = 0\n"), Contains("solver.maxit"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[smoother]\nkind = \"sor\"\n"),
                       Contains("one of: jacobi, gauss-seidel"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[problem]\npde = \"stokes\"\n"),
                       Contains("one of: poisson, elasticity"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[basis]\nfamily = \"hermite\"\n"),
                       Contains("one of: lagrange, bspline, thb"), ConfigError);
}

TEST_CASE("format_double emits the shortest exact decimal") {
  for (double v : {0.1, 1.0 / 3.0, 0.5, 1.0, -0.0, 1e-300, 6.02214076e23, M_PI,
                   std::nextafter(1.0, 2.0), -123456.789, 2e-308}) {
    CAPTURE(v);
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.25) == "-2.25");
  CHECK(format_double(1e100) == "1e+100");
  CHECK(format_double(0.1) == "0.1");  // shortest form, not 17 digits
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("config files load from disk and the shipped cases are valid") {
  CHECK_THROWS_WITH_AS(load_case_config("/nonexistent/missing.toml"),
                       Contains("cannot open config file"), ConfigError);
  const std::string path = "test_config_tmp.toml";
  {
    std::ofstream out(path);
    out << "[basis]\ndegree = 2\n[mesh]\nresolution = 4\n";
  }
  CHECK(load_case_config(path).mesh.resolution[0] == 4);
  std::remove(path.c_str());

  for (const char* shipped : {"cases/star2d.toml", "cases/mbb.toml"}) {
    CAPTURE(shipped);
    const CaseConfig c = load_case_config(repo_file(shipped));
    CHECK_NOTHROW(validate(c));
    CHECK_NOTHROW(parse_levelset(c.geometry));
  }
}
