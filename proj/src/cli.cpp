#include "fwkit/cli.hpp"

#include "fwkit/circle.hpp"
#include "fwkit/fields.hpp"
#include "fwkit/hje.hpp"
#include "fwkit/mechanics.hpp"
#include "fwkit/mpp.hpp"
#include "fwkit/neq.hpp"
#include "fwkit/oracle.hpp"
#include "fwkit/ratefn.hpp"
#include "fwkit/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <variant>

namespace fwkit::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw ConfigError("config: " + path + ": " + msg);
}

// View of one JSON object in the config. Readers with a default write the
// default back so the object ends up fully resolved for the manifest.
class Node {
 public:
  Node(json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j_->is_object()) bad(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_->contains(key) && !(*j_)[key].is_null(); }
  json& raw(const std::string& key) { return (*j_)[key]; }

  Node child(const std::string& key) {
    if (!has(key)) bad(at(key), "missing");
    return Node((*j_)[key], at(key));
  }
  Node child_or_empty(const std::string& key) {
    if (!has(key)) (*j_)[key] = json::object();
    return Node((*j_)[key], at(key));
  }

  double num(const std::string& key) {
    if (!has(key)) bad(at(key), "missing");
    return to_num((*j_)[key], at(key));
  }
  double num(const std::string& key, double def) {
    if (!has(key)) (*j_)[key] = def;
    return num(key);
  }
  double positive(const std::string& key) {
    const double v = num(key);
    if (!(v > 0.0)) bad(at(key), "must be positive");
    return v;
  }
  double positive(const std::string& key, double def) {
    if (!has(key)) (*j_)[key] = def;
    return positive(key);
  }
  long long integer(const std::string& key, long long lo) {
    if (!has(key)) bad(at(key), "missing");
    const json& v = (*j_)[key];
    if (!v.is_number_integer()) bad(at(key), "expected an integer");
    const long long r = v.get<long long>();
    if (r < lo) bad(at(key), "must be at least " + std::to_string(lo));
    return r;
  }
  long long integer(const std::string& key, long long def, long long lo) {
    if (!has(key)) (*j_)[key] = def;
    return integer(key, lo);
  }
  bool flag(const std::string& key, bool def) {
    if (!has(key)) (*j_)[key] = def;
    if (!(*j_)[key].is_boolean()) bad(at(key), "expected true or false");
    return (*j_)[key].get<bool>();
  }
  std::string str(const std::string& key, const std::string& def) {
    if (!has(key)) (*j_)[key] = def;
    if (!(*j_)[key].is_string()) bad(at(key), "expected a string");
    return (*j_)[key].get<std::string>();
  }
  std::uint64_t seed() {
    if (!has("seed")) (*j_)["seed"] = 0;
    const json& v = (*j_)["seed"];
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    bad(at("seed"), "expected a 64-bit integer");
  }
  std::vector<double> nums(const std::string& key) {
    if (!has(key)) bad(at(key), "missing");
    json& v = (*j_)[key];
    if (!v.is_array()) bad(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(to_num(v[i], at(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }
  std::vector<double> nums(const std::string& key, const std::vector<double>& def) {
    if (!has(key)) (*j_)[key] = def;
    return nums(key);
  }
  // A point: a bare number (1-D) or an array with one entry per axis.
  Vec point(const std::string& key, int dim) {
    if (!has(key)) bad(at(key), "missing");
    if ((*j_)[key].is_number()) (*j_)[key] = json::array({(*j_)[key]});
    const auto xs = nums(key);
    if (static_cast<int>(xs.size()) != dim) {
      bad(at(key), "expected " + std::to_string(dim) + " component(s)");
    }
    return vec_from(xs);
  }
  Vec point(const std::string& key, int dim, double fill) {
    if (!has(key)) (*j_)[key] = std::vector<double>(static_cast<std::size_t>(dim), fill);
    return point(key, dim);
  }
  // Either an explicit list or {"min", "max", "n"}.
  std::vector<double> points(const std::string& key) {
    if (!has(key)) bad(at(key), "missing");
    if ((*j_)[key].is_array()) {
      auto xs = nums(key);
      if (xs.empty()) bad(at(key), "empty list");
      return xs;
    }
    Node r = child(key);
    const double lo = r.num("min");
    const double hi = r.num("max");
    const long long n = r.integer("n", 1);
    if (n > 1 && !(hi > lo)) bad(r.at("max"), "must exceed min");
    std::vector<double> xs;
    for (long long i = 0; i < n; ++i) {
      xs.push_back(n == 1 ? lo : (i == n - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1)));
    }
    return xs;
  }

 private:
  static double to_num(const json& v, const std::string& path) {
    if (!v.is_number()) bad(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad(path, "must be finite");
    return d;
  }

  json* j_;
  std::string path_;
};

// ---------------------------------------------------------------- output

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

using Cell = std::variant<double, long long, std::string, std::optional<double>>;

class Csv {
 public:
  Csv(const fs::path& file, const std::vector<std::string>& header) : file_(file) {
    out_.open(file, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot write " + file.string());
    row_strings(header);
  }
  ~Csv() = default;

  void row(const std::vector<Cell>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (const Cell& c : cells) {
      if (auto d = std::get_if<double>(&c)) s.push_back(fmt(*d));
      else if (auto i = std::get_if<long long>(&c)) s.push_back(std::to_string(*i));
      else if (auto t = std::get_if<std::string>(&c)) s.push_back(*t);
      else {
        const auto& o = std::get<std::optional<double>>(c);
        s.push_back(o ? fmt(*o) : "");
      }
    }
    row_strings(s);
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("failed writing " + file_.string());
  }

 private:
  void row_strings(const std::vector<std::string>& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out_ << ',';
      out_ << s[i];
    }
    out_ << '\n';
  }

  fs::path file_;
  std::ofstream out_;
};

void write_json(const fs::path& file, const json& j) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << j.dump(2) << '\n';
  out.close();
  if (!out) throw IoError("failed writing " + file.string());
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<std::string> axis_names(int dim) {
  return dim == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"};
}

std::vector<std::string> with_prefix(const std::string& p, int dim) {
  std::vector<std::string> out;
  for (int i = 0; i < dim; ++i) out.push_back(p + std::to_string(i));
  return out;
}

void append_vec(std::vector<Cell>& row, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) row.emplace_back(v(i));
}

// ---------------------------------------------------------------- inputs

DriftField load_field(Node& root) {
  if (!root.has("field")) bad("field", "missing");
  const FieldSpec spec = field_spec_from_json(root.raw("field"), "field");
  DriftField f = build_field(spec);
  root.raw("field") = field_spec_to_json(spec);
  return f;
}

void require_dim(const DriftField& f, int dim, const std::string& cmd) {
  if (f.dim() != dim) bad("field", cmd + " needs a " + std::to_string(dim) + "-D field");
}

void require_circle(const DriftField& f, const std::string& cmd) {
  if (f.domain() != Domain::circle) bad("field.kind", cmd + " needs a circle field");
}

std::vector<Axis> load_axes(Node& root, const DriftField& field, int default_n) {
  json& g = root.raw("grid");
  if (g.is_null()) {
    g = json::array();
    for (int d = 0; d < field.dim(); ++d) {
      g.push_back({{"min", field.domain_lo()}, {"max", field.domain_hi()}, {"n", default_n}});
    }
  }
  if (g.is_object()) g = json::array({g});
  if (!g.is_array() || static_cast<int>(g.size()) != field.dim()) {
    bad("grid", "expected one {min, max, n} per axis of the field");
  }
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Node a(g[i], "grid[" + std::to_string(i) + "]");
    Axis ax;
    ax.min = a.num("min");
    ax.max = a.num("max");
    if (!(ax.max > ax.min)) bad(a.at("max"), "must exceed min");
    ax.n = static_cast<int>(a.integer("n", 16));
    axes.push_back(ax);
  }
  return axes;
}

MeanSource load_source(Node& root) {
  Node s = root.child("source");
  const std::string kind = s.str("kind", "gaussian");
  if (kind == "gaussian") return MeanSource::gaussian(s.num("mean", 0.0), s.positive("variance", 1.0));
  if (kind == "bernoulli") {
    const double p = s.num("p");
    if (!(p > 0.0 && p < 1.0)) bad(s.at("p"), "must lie in (0, 1)");
    return MeanSource::bernoulli(p);
  }
  if (kind == "point") return MeanSource::point(s.num("at"));
  if (kind == "samples") {
    auto data = s.nums("data");
    if (data.empty()) bad(s.at("data"), "empty list");
    return MeanSource::empirical(std::move(data));
  }
  bad(s.at("kind"), "unknown source \"" + kind + "\"");
}

struct Run {
  std::string command;
  json config;
  fs::path out;
};

using Handler = std::function<void(Run&)>;

// ---------------------------------------------------------------- commands

void cmd_simulate(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  Node sim = root.child("sim");
  const double eps = sim.num("eps");
  if (eps < 0.0) bad(sim.at("eps"), "must be non-negative");
  const double dt = sim.positive("dt");
  const double T = sim.positive("T");
  const Vec x0 = sim.point("x0", field.dim());
  const std::uint64_t seed = sim.seed();
  const long long paths = sim.integer("paths", 1, 1);
  const long long every = sim.integer("record_every", 1, 1);

  std::vector<std::string> header{"path", "t"};
  for (auto& n : axis_names(field.dim())) header.push_back(n);
  Csv csv(r.out / "path.csv", header);
  json runs = json::array();
  for (long long k = 0; k < paths; ++k) {
    const PathSample p = euler_maruyama(field, x0, eps, dt, T, seed, static_cast<std::uint64_t>(k));
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i % every != 0 && i + 1 != p.size()) continue;
      std::vector<Cell> row{k, p.times[i]};
      append_vec(row, p.states[i]);
      csv.row(row);
    }
    json e = {{"path", k}, {"terminal", to_std(p.states.back())}, {"action", action(field, p)}};
    if (eps > 0.0) {
      const PathWeight w = path_weight_exponent(field, p, eps);
      e["weight_drift_term"] = w.drift_term;
      e["weight_divergence_term"] = w.divergence_term;
    }
    runs.push_back(e);
  }
  csv.close();
  write_json(r.out / "summary.json", {{"paths", runs}});
}

Region load_region(Node& root, int dim) {
  Node ev = root.child("event");
  const std::string kind = ev.str("kind", "box");
  if (kind == "all") return Region::everything();
  if (kind == "ball") {
    const Vec c = ev.point("center", dim);
    const double rad = ev.num("radius");
    if (rad < 0.0) bad(ev.at("radius"), "must be non-negative");
    return Region::ball(c, rad);
  }
  if (kind != "box") bad(ev.at("kind"), "expected box, ball or all");
  // null bounds mean unbounded on that side
  auto bound = [&](const std::string& key, double inf) {
    json& v = ev.raw(key);
    if (v.is_null()) v = std::vector<json>(static_cast<std::size_t>(dim), nullptr);
    if (v.is_number()) v = json::array({v});
    if (!v.is_array() || static_cast<int>(v.size()) != dim) {
      bad(ev.at(key), "expected " + std::to_string(dim) + " bound(s)");
    }
    Vec out(dim);
    for (int i = 0; i < dim; ++i) {
      if (v[i].is_null()) out(i) = inf;
      else if (v[i].is_number()) out(i) = v[i].get<double>();
      else bad(ev.at(key) + "[" + std::to_string(i) + "]", "expected a number or null");
    }
    return out;
  };
  const double inf = std::numeric_limits<double>::infinity();
  return Region::box(bound("lo", -inf), bound("hi", inf));
}

void cmd_rate_mc(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  Node sim = root.child("sim");
  const double dt = sim.positive("dt");
  const double T = sim.positive("T");
  const long long N = sim.integer("N", 1);
  const Vec x0 = sim.point("x0", field.dim());
  const std::uint64_t seed = sim.seed();
  const auto eps_list = root.nums("eps_list");
  if (eps_list.empty()) bad("eps_list", "empty list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) bad("eps_list[" + std::to_string(i) + "]", "must be positive");
    if (i && !(eps_list[i] < eps_list[i - 1])) bad("eps_list", "must be strictly decreasing");
  }
  const Region event = load_region(root, field.dim());
  std::optional<double> ref;
  if (root.has("reference_action")) ref = root.num("reference_action");

  const RateReport rep = rare_event_sweep(field, x0, eps_list, dt, T, event, N, seed, ref);
  Csv csv(r.out / "rates.csv", {"eps", "n", "hits", "p_hat", "std_error", "rate", "underflow"});
  for (const RateRow& row : rep.rows) {
    csv.row({row.eps, row.n, row.hits, row.p_hat, row.std_error, row.rate,
             static_cast<long long>(row.underflow)});
  }
  csv.close();
  json s = {{"event", rep.event}};
  s["reference_action"] = ref ? json(*ref) : json(nullptr);
  write_json(r.out / "summary.json", s);
}

HamiltonianTrajectory run_hamilton(Node& root, const DriftField& field, Node& h) {
  PhasePoint start{h.point("q0", field.dim()), h.point("p0", field.dim(), 0.0)};
  const double dt = h.positive("dt", 1e-3);
  const double T = h.positive("T");
  (void)root;
  return integrate_hamiltonian(field, start, dt, T);
}

void cmd_hamilton(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  Node h = root.child("hamilton");
  const long long every = h.integer("record_every", 1, 1);
  const HamiltonianTrajectory tr = run_hamilton(root, field, h);

  std::vector<std::string> header{"t"};
  for (auto& n : with_prefix("q", field.dim())) header.push_back(n);
  for (auto& n : with_prefix("p", field.dim())) header.push_back(n);
  header.insert(header.end(), {"H", "u"});
  Csv csv(r.out / "trajectory.csv", header);
  double excess = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const Vec b = field.drift(tr.q[i]);
    const Vec qdot = 2.0 * tr.p[i] + b;
    excess = std::max(excess, std::abs(qdot.squaredNorm() - b.squaredNorm() - 4.0 * tr.H[i]));
    if (i % every != 0 && i + 1 != tr.size()) continue;
    std::vector<Cell> row{tr.times[i]};
    append_vec(row, tr.q[i]);
    append_vec(row, tr.p[i]);
    row.emplace_back(tr.H[i]);
    row.emplace_back(tr.u[i]);
    csv.row(row);
  }
  csv.close();
  write_json(r.out / "summary.json",
             {{"H0", tr.H.front()},
              {"max_energy_drift", tr.max_energy_drift},
              {"energy_warning", tr.energy_warning},
              {"max_excess_kinetic_residual", excess},
              {"lorentz_residual", tr.size() >= 3 ? json(lorentz_residual(field, tr)) : json(nullptr)}});
}

void cmd_phase_portrait(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  require_dim(field, 1, "phase-portrait");
  Node ph = root.child_or_empty("phase");
  const double lo = ph.num("q_min", field.domain_lo());
  const double hi = ph.num("q_max", field.domain_hi());
  if (!(hi > lo)) bad(ph.at("q_max"), "must exceed q_min");
  const long long n = ph.integer("n", 401, 2);
  const long long cells = ph.integer("cells", 1024, 1);
  const auto energies = ph.nums("energies", {0.0});

  const EquilibriumScan scan = classify_equilibria(field, lo, hi, static_cast<int>(cells));
  Csv eq(r.out / "equilibria.csv", {"q", "p", "family", "type", "eigen_sq"});
  for (const Equilibrium& e : scan.points) {
    eq.row({e.q, e.p, std::string(1, e.family), to_string(e.type), e.eigen_sq});
  }
  eq.close();

  std::vector<double> grid;
  for (long long i = 0; i < n; ++i) {
    grid.push_back(i == n - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
  }
  Csv ct(r.out / "contour.csv", {"E", "q", "p_plus", "p_minus"});
  for (double E : energies) {
    for (const ContourPoint& c : phase_contour(field, E, grid)) ct.row({E, c.q, c.p_plus, c.p_minus});
  }
  ct.close();
  json fails = json::array();
  for (auto& f : scan.failures) fails.push_back({f.first, f.second});
  write_json(r.out / "summary.json",
             {{"equilibria", static_cast<long long>(scan.points.size())}, {"failures", fails}});
}

void write_path(const fs::path& file, const PathSample& p, const DriftField& field) {
  std::vector<std::string> header{"t"};
  for (auto& n : with_prefix("q", field.dim())) header.push_back(n);
  const bool mom = p.momentum.size() == p.size();
  if (mom) {
    for (auto& n : with_prefix("p", field.dim())) header.push_back(n);
    header.push_back("H");
  }
  Csv csv(file, header);
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::vector<Cell> row{p.times[i]};
    append_vec(row, p.states[i]);
    if (mom) {
      append_vec(row, p.momentum[i]);
      row.emplace_back(i < p.energy.size() ? p.energy[i] : std::nan(""));
    }
    csv.row(row);
  }
  csv.close();
}

json mpp_json(const MppResult& m) {
  return {{"action", m.action},
          {"energy", m.energy},
          {"max_energy_deviation", m.max_energy_deviation},
          {"converged", m.converged},
          {"iterations", m.iterations},
          {"gradient_norm", m.gradient_norm}};
}

void cmd_mpp(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  Node m = root.child("mpp");
  const Vec q1 = m.point("q1", field.dim());
  const Vec q2 = m.point("q2", field.dim());
  const double T = m.positive("T");
  const std::string method = m.str("method", field.dim() == 1 ? "both" : "minimize");
  if (method != "shoot" && method != "minimize" && method != "both") {
    bad(m.at("method"), "expected shoot, minimize or both");
  }
  if (method != "minimize" && field.dim() != 1) bad(m.at("method"), "shooting needs a 1-D field");
  const long long knots = m.integer("knots", 128, 1);
  const long long path_steps = m.integer("path_steps", 1000, 2);
  MinimizeOptions opts;
  opts.grad_tol = m.positive("grad_tol", opts.grad_tol);
  opts.max_iter = m.integer("max_iter", opts.max_iter, 1);

  json s = json::object();
  std::optional<double> a_shoot, a_min;
  bool converged = true;
  if (method != "minimize") {
    const MppResult res = mpp_shoot_1d(field, q1(0), q2(0), T, static_cast<int>(path_steps));
    write_path(r.out / "path_shoot.csv", res.path, field);
    s["shoot"] = mpp_json(res);
    a_shoot = res.action;
  }
  if (method != "shoot") {
    const MppResult res = mpp_minimize(field, q1, q2, T, static_cast<int>(knots), opts);
    write_path(r.out / "path_minimize.csv", res.path, field);
    s["minimize"] = mpp_json(res);
    a_min = res.action;
    converged = res.converged;
  }
  if (a_shoot && a_min) {
    s["relative_difference"] = std::abs(*a_shoot - *a_min) / std::max(std::abs(*a_shoot), 1e-300);
  }
  write_json(r.out / "summary.json", s);
  if (!converged) throw NumericalError("mpp: minimization did not converge");
}

GridFn load_u0(Node& h, const DriftField& field, const std::vector<Axis>& axes) {
  Node u = h.child("u0");
  const std::string kind = u.str("kind", "quadratic");
  if (kind == "zero") return tabulate(axes, [](const Vec&) { return 0.0; });
  if (kind == "quadratic") {
    const Vec mu = u.point("mu", field.dim());
    const double s2 = u.positive("sigma2");
    return tabulate(axes, [&](const Vec& x) { return (x - mu).squaredNorm() / (2.0 * s2); });
  }
  if (kind == "stationary") {
    if (field.dim() != 1) bad(u.at("kind"), "stationary start needs a 1-D field");
    return stationary_rate_1d(field, axes[0], u.num("x_ref", 0.0));
  }
  if (kind == "table") {
    const auto vals = u.nums("values");
    GridFn g = make_grid(axes);
    if (vals.size() != g.size()) {
      bad(u.at("values"), "expected " + std::to_string(g.size()) + " values");
    }
    g.values = vals;
    return g;
  }
  bad(u.at("kind"), "expected quadratic, zero, stationary or table");
}

void write_grid(const fs::path& file, const GridFn& g) {
  std::vector<std::string> header = axis_names(g.dim());
  header.push_back("u");
  Csv csv(file, header);
  for (std::size_t k = 0; k < g.size(); ++k) {
    std::vector<Cell> row;
    append_vec(row, g.point(k));
    if (g.mask.empty() || g.mask[k]) row.emplace_back(g.values[k]);
    else row.emplace_back(std::optional<double>{});
    csv.row(row);
  }
  csv.close();
}

std::string snapshot_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%03zu.csv", k);
  return buf;
}

void cmd_hje(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  const auto axes = load_axes(root, field, 201);
  Node h = root.child("hje");
  const double T = h.positive("T");
  const double eps_v = h.num("eps_viscous", 0.0);
  if (eps_v < 0.0) bad(h.at("eps_viscous"), "must be non-negative");
  const long long snaps = h.integer("snapshots", 5, 1);
  const GridFn u0 = load_u0(h, field, axes);

  const HjeResult res = hje_evolve(field, u0, T, eps_v, static_cast<int>(snaps));
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    write_grid(r.out / snapshot_name(k), res.snapshots[k]);
  }
  const ModalTrace tr = track_minimum(res.snapshots, res.times);
  std::vector<std::string> header{"t"};
  for (auto& n : axis_names(field.dim())) header.push_back(n + "_star");
  header.insert(header.end(), {"u_star", "curvature"});
  Csv csv(r.out / "modal.csv", header);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    std::vector<Cell> row{tr.times[k]};
    append_vec(row, tr.argmin[k]);
    row.emplace_back(tr.min_value[k]);
    row.emplace_back(k < tr.curvature.size() ? tr.curvature[k] : std::nan(""));
    csv.row(row);
  }
  csv.close();

  json s = {{"steps", res.steps},
            {"degenerate", res.degenerate},
            {"times", res.times},
            {"modal_truncated", tr.truncated}};
  // Closed-form comparison for the Gaussian case.
  Node u = h.child("u0");
  if (field.kind() == FieldKind::ou && eps_v == 0.0 && u.str("kind", "") == "quadratic") {
    OuState st;
    st.b_coef = field.spec().b_coef;
    st.mu = u.point("mu", 1)(0);
    st.sigma2 = u.num("sigma2");
    json errs = json::array();
    for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
      const GridFn& g = res.snapshots[k];
      const GridFn exact =
          tabulate(g.axes, [&](const Vec& x) { return ou_rate(st, x(0), res.times[k]); });
      const double m = g.min_value();
      const double me = exact.min_value();
      double e = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        e = std::max(e, std::abs((g.values[i] - m) - (exact.values[i] - me)));
      }
      errs.push_back(e);
    }
    s["oracle_sup_error"] = errs;
  }
  write_json(r.out / "summary.json", s);
}

void cmd_stationary(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  require_dim(field, 1, "stationary");
  if (field.domain() != Domain::line) bad("field.kind", "stationary needs a field on the line");
  const auto axes = load_axes(root, field, 401);
  Node st = root.child_or_empty("stationary");
  const GridFn g = stationary_rate_1d(field, axes[0], st.num("x_ref", 0.0));
  write_grid(r.out / "stationary.csv", g);
  json s = {{"min", g.min_value()}};
  if (st.has("barrier")) {
    Node b = st.child("barrier");
    s["barrier"] = uphill_action_1d(field, b.num("from"), b.num("to"));
  }
  write_json(r.out / "summary.json", s);
}

void cmd_oracle(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  if (field.kind() != FieldKind::ou) bad("field.kind", "oracle needs an ou field");
  Node o = root.child("oracle");
  OuState s0;
  s0.b_coef = field.spec().b_coef;
  s0.mu = o.num("mu0", 0.0);
  if (o.has("sigma2_0")) s0.sigma2 = o.positive("sigma2_0");
  else s0.sigma2 = std::numeric_limits<double>::infinity();
  s0.a = o.num("a0", 0.0);
  s0.eps = o.num("eps", 0.0);
  if (s0.eps < 0.0) bad(o.at("eps"), "must be non-negative");
  const auto times = o.nums("times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0) bad(o.at("times") + "[" + std::to_string(i) + "]", "must be non-negative");
  }

  json out = {{"times", times}};
  json mu = json::array(), s2 = json::array(), a = json::array();
  for (double t : times) {
    const OuState st = ou_params(s0, t);
    mu.push_back(st.mu);
    s2.push_back(num_or_null(st.sigma2));
    a.push_back(num_or_null(st.a));
  }
  out["mu"] = mu;
  out["sigma2"] = s2;
  out["a"] = a;
  if (o.has("kernel")) {
    Node k = o.child("kernel");
    const auto g = ou_transition_kernel(-s0.b_coef, k.num("eps"), k.num("x_prev"), k.positive("dt"));
    out["kernel"] = {{"mean", g.mean}, {"variance", g.variance}};
  }
  write_json(r.out / "oracle.json", out);
  if (o.has("x")) {
    const auto xs = o.points("x");
    Csv csv(r.out / "rates.csv", {"t", "x", "u"});
    for (double t : times) {
      for (double x : xs) csv.row({t, x, ou_rate(s0, x, t)});
    }
    csv.close();
  }
}

void cmd_legendre(Run& r) {
  Node root(r.config, "");
  const MeanSource src = load_source(root);
  Node l = root.child_or_empty("legendre");
  const double tmax = l.positive("theta_max", 10.0);
  const long long tn = l.integer("theta_n", 4001, 3);
  if (tn % 2 == 0) bad(l.at("theta_n"), "must be odd");
  const auto xs = l.points("x");
  const CgfTable tab = cgf(src, symmetric_grid(tmax, static_cast<int>(tn)));

  Csv c(r.out / "cgf.csv", {"theta", "lambda"});
  for (std::size_t i = 0; i < tab.theta.size(); ++i) c.row({tab.theta[i], tab.lambda[i]});
  c.close();
  Csv csv(r.out / "legendre.csv", {"x", "rate", "theta_star", "unreliable"});
  for (double x : xs) {
    const LegendreValue v = legendre(tab, x);
    csv.row({x, v.value, v.theta_star, static_cast<long long>(v.unreliable)});
  }
  csv.close();
  json s = {{"source", src.describe()}};
  try {
    const RateProperties p = rate_properties(tab);
    s["argmin"] = p.argmin;
    s["min"] = p.min;
    s["curvature"] = p.curvature;
  } catch (const NumericalError& e) {
    s["degenerate"] = e.what();
  }
  write_json(r.out / "summary.json", s);
}

void cmd_lln(Run& r) {
  Node root(r.config, "");
  const MeanSource src = load_source(root);
  Node l = root.child("lln");
  const auto n_raw = l.nums("n_list");
  if (n_raw.empty()) bad(l.at("n_list"), "empty list");
  std::vector<int> ns;
  for (std::size_t i = 0; i < n_raw.size(); ++i) {
    if (!(n_raw[i] >= 1.0) || n_raw[i] != std::floor(n_raw[i]) || n_raw[i] > 1e9) {
      bad(l.at("n_list") + "[" + std::to_string(i) + "]", "expected a positive integer");
    }
    ns.push_back(static_cast<int>(n_raw[i]));
  }
  const auto xs = l.points("x");
  const long long M = l.integer("M", 1);
  SampleMeanOptions opts;
  opts.bin_width = l.num("bin_width", 0.0);
  if (opts.bin_width < 0.0) bad(l.at("bin_width"), "must be non-negative");
  opts.tilt = l.flag("tilt", true);
  const std::uint64_t seed = root.child_or_empty("sim").seed();

  const auto rows = sample_mean_rate(src, ns, xs, M, seed, opts);
  std::optional<CgfTable> ref;
  if (src.kind != MeanSource::Kind::point &&
      !(src.kind == MeanSource::Kind::samples && src.data.size() < 1000)) {
    ref = cgf(src, symmetric_grid(20.0, 4001));
  }
  Csv csv(r.out / "lln.csv", {"n", "x", "rate", "tilt", "legendre"});
  json degenerate = json::array();
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.x.size(); ++i) {
      std::optional<double> lv;
      if (ref) lv = legendre(*ref, row.x[i]).value;
      csv.row({static_cast<long long>(row.n), row.x[i], row.rate[i], row.tilt[i], lv});
    }
    degenerate.push_back(row.degenerate);
  }
  csv.close();
  write_json(r.out / "summary.json", {{"source", src.describe()}, {"degenerate", degenerate}});
}

void cmd_circle(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  require_circle(field, "circle");
  Node c = root.child_or_empty("circle");
  const double x0 = c.num("x0", 0.0);
  const double y0 = c.num("y0", 1.0);
  if (y0 < 0.0) bad(c.at("y0"), "must be non-negative");
  const double dt = c.positive("dt", 1e-3);
  const double T = c.positive("T", 20.0);
  const long long every = c.integer("record_every", 10, 1);

  const CircleTrace tr = circle_flow(field, x0, y0, dt, T);
  Csv csv(r.out / "trace.csv", {"t", "x", "y", "phi", "v"});
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    if (i % every != 0 && i + 1 != tr.t.size()) continue;
    std::optional<double> phi, v;
    if (tr.has_phi) {
      phi = tr.phi[i];
      v = tr.v[i];
    }
    csv.row({tr.t[i], tr.x[i], tr.y[i], phi, v});
  }
  csv.close();
  const auto period = limit_cycle_period(field);
  json s = {{"final_x", tr.x.back()}, {"final_y", tr.y.back()}};
  s["period"] = period ? json(*period) : json(nullptr);
  if (tr.has_phi) {
    const CurvatureDecayReport rep = curvature_decay_check(tr);
    s["v_non_increasing"] = rep.non_increasing;
    s["v_max_increase"] = rep.max_increase;
    s["final_v"] = rep.final_v;
  }
  write_json(r.out / "summary.json", s);
}

void cmd_torus(Run& r) {
  Node root(r.config, "");
  // Either a circle field b directly or {b0, U: {alpha, beta}} with b = b0 - U'.
  const DriftField field = [&] {
    if (root.has("field") || !root.has("torus")) {
      DriftField f = load_field(root);
      require_circle(f, "torus");
      return f;
    }
    Node t = root.child("torus");
    Node u = t.child("U");
    return torus_field(t.num("b0", 0.0), u.nums("alpha", {}), u.nums("beta", {}));
  }();
  const auto pts = torus_fixed_points(field);
  Csv csv(r.out / "fixed_points.csv", {"theta", "omega", "family", "type"});
  long long n1 = 0, n2 = 0;
  for (const auto& p : pts) {
    csv.row({p.theta, p.omega, static_cast<long long>(p.family), to_string(p.type)});
    (p.family == 1 ? n1 : n2)++;
  }
  csv.close();
  write_json(r.out / "summary.json", {{"family1", n1}, {"family2", n2}});
}

void cmd_entropy(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  Node e = root.child("entropy");
  const double eps = e.positive("eps");
  const PiSource src = [&] {
    try {
      return pi_source_from_string(e.str("pi_source", "analytic"));
    } catch (const ConfigError&) {
      bad(e.at("pi_source"), "expected \"analytic\" or \"sampled\"");
    }
  }();
  const long long N = e.integer("N", 2);
  EpOptions opts;
  opts.dt = e.positive("dt", opts.dt);
  opts.burn_in = e.num("burn_in", opts.burn_in);
  if (opts.burn_in < 0.0) bad(e.at("burn_in"), "must be non-negative");
  opts.thin = static_cast<int>(e.integer("thin", opts.thin, 1));
  opts.batches = static_cast<int>(e.integer("batches", opts.batches, 2));
  const std::uint64_t seed = root.child_or_empty("sim").seed();
  if (!field.has_decomposition()) bad("field.kind", "entropy needs ou, rot_ou or decomposed2d");

  const EpEstimate est = entropy_production(field, eps, src, N, seed, opts);
  write_json(r.out / "entropy.json", {{"eps", est.eps},
                                      {"method", to_string(est.method)},
                                      {"samples", est.samples},
                                      {"value", est.value},
                                      {"std_error", est.std_error}});
}

void cmd_reverse(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  if (!field.has_decomposition()) bad("field.kind", "reverse needs ou, rot_ou or decomposed2d");
  Node rv = root.child_or_empty("reverse");
  const long long per_axis = rv.integer("per_axis", 21, 2);
  const DriftField rev = time_reversed_drift(field);
  const DriftField twice = time_reversed_drift(rev);
  const auto pts = domain_lattice(field, static_cast<int>(per_axis));
  const ReversalCheck chk = check_reversal(field, rev, pts);
  bool exact = true;
  for (const Vec& x : pts) exact = exact && (twice.drift(x).array() == field.drift(x).array()).all();

  json s = {{"reversed_field", field_spec_to_json(rev.spec())},
            {"max_sum_residual", chk.max_sum_residual},
            {"max_ell_residual", chk.max_ell_residual},
            {"double_reversal_exact", exact}};
  if (rv.has("landscape")) {
    Node l = rv.child("landscape");
    const Vec x0 = l.point("x0", field.dim());
    const double dt = l.positive("dt", 1e-3);
    const double T = l.positive("T", 1.0);
    const auto m = momentum_landscape_check(field, x0, dt, T);
    const auto ly = lyapunov_check(field, x0, dt, T);
    s["landscape"] = {{"max_H_residual", m.max_H_residual},
                      {"max_p_ell_residual", m.max_p_ell_residual},
                      {"max_p_grad_residual", m.max_p_grad_residual},
                      {"degenerate", m.degenerate},
                      {"uphill_worst_decrease", ly.uphill_worst},
                      {"downhill_worst_increase", ly.downhill_worst},
                      {"lyapunov_monotone", ly.monotone}};
  }
  write_json(r.out / "reverse.json", s);
}

void cmd_lorentz(Run& r) {
  Node root(r.config, "");
  const DriftField field = load_field(root);
  Node h = root.child("hamilton");
  const HamiltonianTrajectory tr = run_hamilton(root, field, h);
  if (tr.size() < 3) bad(h.at("T"), "trajectory needs at least 3 points");
  write_json(r.out / "lorentz.json", {{"residual", lorentz_residual(field, tr)},
                                      {"H0", tr.H.front()},
                                      {"max_energy_drift", tr.max_energy_drift}});
}

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"simulate", cmd_simulate},   {"rate-mc", cmd_rate_mc},
      {"hamilton", cmd_hamilton},   {"phase-portrait", cmd_phase_portrait},
      {"mpp", cmd_mpp},             {"hje", cmd_hje},
      {"stationary", cmd_stationary}, {"oracle", cmd_oracle},
      {"legendre", cmd_legendre},   {"lln", cmd_lln},
      {"circle", cmd_circle},       {"torus", cmd_torus},
      {"entropy", cmd_entropy},     {"reverse", cmd_reverse},
      {"lorentz", cmd_lorentz},
  };
  return h;
}

json read_config(const std::string& path, const std::string& command) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: <root>: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("<root>", "expected an object");
  // A manifest from an earlier run carries the resolved config.
  if (j.contains("manifest_version") && j.contains("config")) {
    if (j.value("command", "") != command) {
      bad("command", "manifest was written by \"" + j.value("command", "") + "\"");
    }
    json inner = j["config"];
    if (!inner.is_object()) bad("config", "expected an object");
    return inner;
  }
  return j;
}

std::uint64_t parse_seed(const std::string& s) {
  std::uint64_t u = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && s[0] == '-') {
    std::int64_t v = 0;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) throw ConfigError("config: --seed: expected an integer");
    return static_cast<std::uint64_t>(v);
  }
  auto res = std::from_chars(b, e, u);
  if (res.ec != std::errc() || res.ptr != e) throw ConfigError("config: --seed: expected an integer");
  return u;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : handlers()) v.push_back(k);
    return v;
  }();
  return names;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Small-noise large-deviation toolkit", "fwkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::string config_path, out_dir = "out", seed_text;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : subcommands()) {
    CLI::App* s = app.add_subcommand(name, "run " + name);
    s->add_option("--config", config_path, "JSON configuration or manifest")->required();
    s->add_option("--out", out_dir, "output directory");
    s->add_option("--seed", seed_text, "override sim.seed");
    subs[name] = s;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  std::string command;
  for (const auto& [name, s] : subs) {
    if (s->parsed()) command = name;
  }

  try {
    Run r;
    r.command = command;
    r.config = read_config(config_path, command);
    if (!seed_text.empty()) {
      json& sim = r.config["sim"];
      if (sim.is_null()) sim = json::object();
      if (!sim.is_object()) bad("sim", "expected an object");
      sim["seed"] = parse_seed(seed_text);
    }
    r.out = out_dir;
    std::error_code ec;
    fs::create_directories(r.out, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    handlers().at(command)(r);
    json manifest = {{"manifest_version", 1},
                     {"artifact", kVersion},
                     {"command", command},
                     {"config", r.config}};
    write_json(r.out / "manifest.json", manifest);
    return 0;
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    std::cerr << (msg.rfind("config:", 0) == 0 ? msg : "config: " + msg) << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "io: " << e.what() << '\n';
    return 1;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("fwkit");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fwkit::cli
