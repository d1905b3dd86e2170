#include "mis/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace mis {

namespace {

struct NamePair {
  const char* name;
  int value;
};

constexpr NamePair kSchemes[] = {
    {"bcd", static_cast<int>(Scheme::kBcd)},
    {"rcg", static_cast<int>(Scheme::kRcg)},
    {"rcg-elementwise", static_cast<int>(Scheme::kRcgElementwise)},
    {"pso", static_cast<int>(Scheme::kPso)},
    {"qsearch", static_cast<int>(Scheme::kQsearch)},
    {"single", static_cast<int>(Scheme::kSingle)},
    {"dynamic", static_cast<int>(Scheme::kDynamic)},
};

constexpr NamePair kAxes[] = {
    {"none", static_cast<int>(SweepAxis::kNone)},
    {"power_dbm", static_cast<int>(SweepAxis::kPower)},
    {"users", static_cast<int>(SweepAxis::kUsers)},
    {"ms1_cols", static_cast<int>(SweepAxis::kMs1Cols)},
    {"kappa_db", static_cast<int>(SweepAxis::kKappa)},
    {"allocation", static_cast<int>(SweepAxis::kAllocation)},
    {"ms2_size", static_cast<int>(SweepAxis::kMs2Size)},
};

constexpr NamePair kFamilies[] = {
    {"location_gaussian", static_cast<int>(RobustnessFamily::kLocationGaussian)},
    {"location_bounded", static_cast<int>(RobustnessFamily::kLocationBounded)},
    {"csi_mix", static_cast<int>(RobustnessFamily::kCsiMix)},
    {"csi_bounded", static_cast<int>(RobustnessFamily::kCsiBounded)},
    {"phase_gaussian", static_cast<int>(RobustnessFamily::kPhaseGaussian)},
    {"phase_bounded", static_cast<int>(RobustnessFamily::kPhaseBounded)},
};

template <std::size_t N>
std::string name_of(const NamePair (&table)[N], int value) {
  for (const auto& p : table)
    if (p.value == value) return p.name;
  return "?";
}

template <std::size_t N>
int value_of(const NamePair (&table)[N], const std::string& name, const char* what) {
  for (const auto& p : table)
    if (name == p.name) return p.value;
  std::string options;
  for (const auto& p : table) options += std::string(options.empty() ? "" : "|") + p.name;
  throw ConfigError(std::string("unknown ") + what + " '" + name + "' (expected " + options + ")");
}

// Reads optional fields of one JSON object, recording every problem instead
// of stopping at the first one.
class Reader {
 public:
  Reader(const nlohmann::json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) errors_.push_back(path_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.is_object() || !obj_.contains(key)) return;
    const auto& v = obj_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_arithmetic_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
        if constexpr (std::is_integral_v<T>) {
          const double d = v.get<double>();
          if (d != std::floor(d)) throw std::invalid_argument("expected an integer");
        }
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      errors_.push_back(field(key) + ": " + e.what());
    }
  }

  bool has(const char* key) const { return obj_.is_object() && obj_.contains(key); }

  const nlohmann::json& child(const char* key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  std::string field(const char* key) const { return path_ + "." + key; }

  void fail(const char* key, const std::string& what) { errors_.push_back(field(key) + ": " + what); }

  void finish() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) errors_.push_back(path_ + "." + key + ": unknown key");
  }

 private:
  const nlohmann::json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void read_direction(Reader& parent, const char* key, Direction& d, std::vector<std::string>& errors) {
  Reader r(parent.child(key), parent.field(key), errors);
  r.get("azimuth", d.azimuth);
  r.get("elevation", d.elevation);
  r.finish();
}

template <std::size_t N, typename E>
void read_enum(Reader& r, const char* key, const NamePair (&table)[N], E& out, const char* what) {
  std::string name;
  r.get(key, name);
  if (name.empty()) return;
  try {
    out = static_cast<E>(value_of(table, name, what));
  } catch (const ConfigError& e) {
    r.fail(key, e.what());
  }
}

void read_objective(Reader& r, const char* key, Objective& out) {
  std::string name;
  r.get(key, name);
  if (name.empty()) return;
  if (name == "min_rate")
    out = Objective::kMinRate;
  else if (name == "throughput")
    out = Objective::kThroughput;
  else
    r.fail(key, "expected min_rate|throughput");
}

std::string objective_name(Objective o) {
  return o == Objective::kMinRate ? "min_rate" : "throughput";
}

void check(std::vector<std::string>& errors, bool ok, const std::string& what) {
  if (!ok) errors.push_back(what);
}

// Collects the errors of a validator that throws.
template <typename Fn>
void collect(std::vector<std::string>& errors, const std::string& where, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    errors.push_back(where + ": " + e.what());
  }
}

[[noreturn]] void raise(const std::vector<std::string>& errors) {
  std::ostringstream os;
  os << "invalid configuration (" << errors.size() << " problem" << (errors.size() == 1 ? "" : "s")
     << "):";
  for (const auto& e : errors) os << "\n  " << e;
  throw ConfigError(os.str());
}

std::vector<std::string> scenario_problems(const Scenario& s) {
  std::vector<std::string> errors;
  collect(errors, "layout", [&] { build_layout(s.layout); });
  const auto& u = s.users;
  check(errors, u.count > 0 || !u.explicit_users.empty(), "users.count: must be positive");
  check(errors, u.distance > 0, "users.distance: must be positive");
  check(errors, u.azimuth_min <= u.azimuth_max, "users.azimuth_min: exceeds azimuth_max");
  check(errors, std::abs(u.elevation) <= kPi / 2, "users.elevation: outside [-pi/2, pi/2]");
  const std::size_t K = u.explicit_users.empty() ? static_cast<std::size_t>(std::max(u.count, 0))
                                                 : u.explicit_users.size();
  const auto& c = s.channel;
  check(errors, c.kappa_user_db.size() == 1 || c.kappa_user_db.size() == K,
        "channel.kappa_user_db: needs one entry or one per user");
  check(errors, c.gamma_ref > 0, "channel.gamma_ref: must be positive");
  check(errors, std::isfinite(c.power_dbm), "channel.power_dbm: must be finite");
  check(errors, s.total_time > 0, "total_time: must be positive");
  check(errors, !s.schemes.empty(), "schemes: at least one scheme required");
  check(errors, !s.seeds.empty(), "seeds: at least one seed required");
  check(errors, s.dynamic_starts > 0, "dynamic.starts: must be positive");
  collect(errors, "bcd", [&] { validate_bcd_config(s.bcd); });
  collect(errors, "rcg", [&] { validate_rcg_config(s.rcg); });
  collect(errors, "pso", [&] { validate_pso_config(s.pso); });
  collect(errors, "qsearch", [&] { validate_quantized_config(s.qsearch); });
  if (s.axis != SweepAxis::kNone) {
    check(errors, !s.sweep_values.empty(), "sweep.values: at least one value required");
    for (double v : s.sweep_values) {
      collect(errors, "sweep.values[" + std::to_string(v) + "]", [&] {
        const Scenario t = apply_sweep_value(s, v);
        build_layout(t.layout);
      });
    }
  }
  if (s.has_robustness) {
    const auto& r = s.robustness;
    check(errors, !r.magnitudes.empty(), "robustness.magnitudes: at least one value required");
    for (double m : r.magnitudes) check(errors, m >= 0, "robustness.magnitudes: must be >= 0");
    if (r.family == RobustnessFamily::kCsiMix)
      for (double m : r.magnitudes) check(errors, m <= 1, "robustness.magnitudes: csi_mix needs <= 1");
    check(errors, r.trials > 0, "robustness.trials: must be positive");
    check(errors,
          r.design == Scheme::kBcd || r.design == Scheme::kRcg || r.design == Scheme::kPso ||
              r.design == Scheme::kQsearch,
          "robustness.design: must be bcd, rcg, pso or qsearch");
  }
  return errors;
}

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

std::string scheme_name(Scheme s) { return name_of(kSchemes, static_cast<int>(s)); }
Scheme parse_scheme(const std::string& name) {
  return static_cast<Scheme>(value_of(kSchemes, name, "scheme"));
}
std::string axis_name(SweepAxis a) { return name_of(kAxes, static_cast<int>(a)); }
SweepAxis parse_axis(const std::string& name) {
  return static_cast<SweepAxis>(value_of(kAxes, name, "sweep axis"));
}
std::string family_name(RobustnessFamily f) { return name_of(kFamilies, static_cast<int>(f)); }
RobustnessFamily parse_family(const std::string& name) {
  return static_cast<RobustnessFamily>(value_of(kFamilies, name, "robustness family"));
}

Scenario parse_scenario(const nlohmann::json& j) {
  Scenario s;
  std::vector<std::string> errors;
  Reader root(j, "config", errors);

  if (root.has("layout")) {
    Reader r(root.child("layout"), "layout", errors);
    r.get("ms1_rows", s.layout.ms1_rows);
    r.get("ms1_cols", s.layout.ms1_cols);
    r.get("ms2_rows", s.layout.ms2_rows);
    r.get("ms2_cols", s.layout.ms2_cols);
    r.get("bs_antennas", s.layout.bs_antennas);
    r.get("spacing", s.layout.spacing);
    r.get("wavelength", s.layout.wavelength);
    r.get("bs_spacing", s.layout.bs_spacing);
    r.finish();
  }

  if (root.has("channel")) {
    Reader r(root.child("channel"), "channel", errors);
    if (r.has("mis_arrival")) read_direction(r, "mis_arrival", s.channel.mis_arrival, errors);
    if (r.has("bs_departure")) read_direction(r, "bs_departure", s.channel.bs_departure, errors);
    if (r.has("kappa_db")) {
      double kappa = 0.0;
      r.get("kappa_db", kappa);
      s.channel.kappa_bs_db = kappa;
      s.channel.kappa_user_db = {kappa};
    }
    r.get("kappa_bs_db", s.channel.kappa_bs_db);
    r.get("kappa_user_db", s.channel.kappa_user_db);
    r.get("gamma_ref", s.channel.gamma_ref);
    r.get("power_dbm", s.channel.power_dbm);
    if (r.has("path_loss")) {
      Reader p(r.child("path_loss"), "channel.path_loss", errors);
      std::string mode;
      p.get("mode", mode);
      if (mode == "folded")
        s.channel.path_loss.mode = PathLossMode::kFolded;
      else if (mode == "log_distance")
        s.channel.path_loss.mode = PathLossMode::kLogDistance;
      else if (!mode.empty())
        p.fail("mode", "expected folded|log_distance");
      p.get("exponent", s.channel.path_loss.exponent);
      p.get("reference_loss_db", s.channel.path_loss.reference_loss_db);
      p.get("noise_dbm", s.channel.path_loss.noise_dbm);
      p.get("bs_mis_distance", s.channel.path_loss.bs_mis_distance);
      p.finish();
    }
    r.finish();
  }

  if (root.has("users")) {
    Reader r(root.child("users"), "users", errors);
    r.get("count", s.users.count);
    r.get("elevation", s.users.elevation);
    r.get("azimuth_min", s.users.azimuth_min);
    r.get("azimuth_max", s.users.azimuth_max);
    r.get("distance", s.users.distance);
    r.get("random", s.users.random);
    if (r.has("explicit")) {
      const auto& list = r.child("explicit");
      if (!list.is_array()) {
        r.fail("explicit", "expected an array");
      } else {
        for (std::size_t i = 0; i < list.size(); ++i) {
          Reader e(list[i], "users.explicit[" + std::to_string(i) + "]", errors);
          UserGeometry g;
          g.distance = s.users.distance;
          e.get("azimuth", g.direction.azimuth);
          e.get("elevation", g.direction.elevation);
          e.get("distance", g.distance);
          e.finish();
          s.users.explicit_users.push_back(g);
        }
      }
    }
    r.finish();
  }

  root.get("total_time", s.total_time);
  read_objective(root, "objective", s.objective);
  root.get("timing", s.timing);

  if (root.has("schemes")) {
    const auto& list = root.child("schemes");
    if (!list.is_array()) {
      root.fail("schemes", "expected an array of names");
    } else {
      s.schemes.clear();
      for (const auto& item : list) {
        try {
          s.schemes.push_back(parse_scheme(item.get<std::string>()));
        } catch (const std::exception& e) {
          root.fail("schemes", e.what());
        }
      }
    }
  }

  if (root.has("seeds")) {
    std::vector<std::uint64_t> seeds;
    root.get("seeds", seeds);
    if (!seeds.empty()) s.seeds = seeds;
  }

  if (root.has("sweep")) {
    Reader r(root.child("sweep"), "sweep", errors);
    read_enum(r, "axis", kAxes, s.axis, "sweep axis");
    r.get("values", s.sweep_values);
    r.finish();
  }

  if (root.has("bcd")) {
    Reader r(root.child("bcd"), "bcd", errors);
    r.get("rho0", s.bcd.rho0);
    r.get("zeta", s.bcd.zeta);
    r.get("eps1", s.bcd.eps1);
    r.get("eps2", s.bcd.eps2);
    r.get("max_inner", s.bcd.max_inner);
    r.get("max_outer", s.bcd.max_outer);
    r.get("sca_tol", s.bcd.sca_tol);
    r.get("sca_max_iter", s.bcd.sca_max_iter);
    r.get("sub_tol", s.bcd.sub_tol);
    r.get("sub_max_iter", s.bcd.sub_max_iter);
    r.get("starts", s.bcd.starts);
    std::string sub;
    r.get("subsolver", sub);
    if (sub == "interior_point")
      s.bcd.subsolver = DiskSolver::kInteriorPoint;
    else if (sub == "first_order")
      s.bcd.subsolver = DiskSolver::kFirstOrder;
    else if (!sub.empty())
      r.fail("subsolver", "expected interior_point|first_order");
    r.finish();
  }

  if (root.has("rcg")) {
    Reader r(root.child("rcg"), "rcg", errors);
    r.get("grad_tol", s.rcg.grad_tol);
    r.get("max_iter", s.rcg.max_iter);
    r.get("alpha0", s.rcg.alpha0);
    r.get("shrink", s.rcg.shrink);
    r.get("armijo_c", s.rcg.armijo_c);
    r.get("max_backtracks", s.rcg.max_backtracks);
    r.get("simplex_floor", s.rcg.simplex_floor);
    r.get("p_weight", s.rcg.p_weight);
    r.get("q_weight", s.rcg.q_weight);
    r.get("starts", s.rcg.starts);
    r.finish();
  }

  if (root.has("pso")) {
    Reader r(root.child("pso"), "pso", errors);
    r.get("swarm", s.pso.swarm);
    r.get("iterations", s.pso.iterations);
    r.get("inertia", s.pso.inertia);
    r.get("cognitive", s.pso.cognitive);
    r.get("social", s.pso.social);
    r.finish();
  }

  if (root.has("qsearch")) {
    Reader r(root.child("qsearch"), "qsearch", errors);
    r.get("bits_phi", s.qsearch.bits_phi);
    r.get("bits_theta", s.qsearch.bits_theta);
    r.get("group_phi", s.qsearch.group_phi);
    r.get("group_theta", s.qsearch.group_theta);
    r.get("c_max", s.qsearch.c_max);
    r.finish();
  }

  if (root.has("dynamic")) {
    Reader r(root.child("dynamic"), "dynamic", errors);
    r.get("starts", s.dynamic_starts);
    r.finish();
  }

  if (root.has("elementwise")) {
    Reader r(root.child("elementwise"), "elementwise", errors);
    r.get("warm_start", s.elementwise_warm_start);
    r.finish();
  }

  if (root.has("robustness")) {
    s.has_robustness = true;
    Reader r(root.child("robustness"), "robustness", errors);
    read_enum(r, "family", kFamilies, s.robustness.family, "robustness family");
    r.get("magnitudes", s.robustness.magnitudes);
    r.get("trials", s.robustness.trials);
    read_enum(r, "design", kSchemes, s.robustness.design, "scheme");
    r.finish();
  }

  root.finish();

  s.bcd.objective = s.objective;
  s.pso.objective = s.objective;
  s.qsearch.objective = s.objective;
  s.bcd.total_time = s.rcg.total_time = s.pso.total_time = s.qsearch.total_time = s.total_time;

  if (errors.empty()) errors = scenario_problems(s);
  else {
    auto more = scenario_problems(s);
    errors.insert(errors.end(), more.begin(), more.end());
  }
  if (!errors.empty()) raise(errors);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(j);
}

void validate_scenario(const Scenario& s) {
  const auto errors = scenario_problems(s);
  if (!errors.empty()) raise(errors);
}

nlohmann::json scenario_to_json(const Scenario& s) {
  using nlohmann::json;
  json j;
  const auto& L = s.layout;
  j["layout"] = {{"ms1_rows", L.ms1_rows},   {"ms1_cols", L.ms1_cols},
                 {"ms2_rows", L.ms2_rows},   {"ms2_cols", L.ms2_cols},
                 {"bs_antennas", L.bs_antennas}, {"spacing", L.spacing},
                 {"wavelength", L.wavelength}, {"bs_spacing", L.bs_spacing}};
  const auto& c = s.channel;
  const auto& pl = c.path_loss;
  j["channel"] = {
      {"mis_arrival", {{"azimuth", c.mis_arrival.azimuth}, {"elevation", c.mis_arrival.elevation}}},
      {"bs_departure", {{"azimuth", c.bs_departure.azimuth}, {"elevation", c.bs_departure.elevation}}},
      {"kappa_bs_db", c.kappa_bs_db},
      {"kappa_user_db", c.kappa_user_db},
      {"gamma_ref", c.gamma_ref},
      {"power_dbm", c.power_dbm},
      {"path_loss",
       {{"mode", pl.mode == PathLossMode::kFolded ? "folded" : "log_distance"},
        {"exponent", pl.exponent},
        {"reference_loss_db", pl.reference_loss_db},
        {"noise_dbm", pl.noise_dbm},
        {"bs_mis_distance", pl.bs_mis_distance}}}};
  const auto& u = s.users;
  j["users"] = {{"count", u.count},           {"elevation", u.elevation},
                {"azimuth_min", u.azimuth_min}, {"azimuth_max", u.azimuth_max},
                {"distance", u.distance},     {"random", u.random}};
  if (!u.explicit_users.empty()) {
    json list = json::array();
    for (const auto& g : u.explicit_users)
      list.push_back({{"azimuth", g.direction.azimuth},
                      {"elevation", g.direction.elevation},
                      {"distance", g.distance}});
    j["users"]["explicit"] = list;
  }
  j["total_time"] = s.total_time;
  j["objective"] = objective_name(s.objective);
  j["timing"] = s.timing;
  json schemes = json::array();
  for (auto sc : s.schemes) schemes.push_back(scheme_name(sc));
  j["schemes"] = schemes;
  j["seeds"] = s.seeds;
  j["sweep"] = {{"axis", axis_name(s.axis)}, {"values", s.sweep_values}};
  const auto& b = s.bcd;
  j["bcd"] = {{"rho0", b.rho0},         {"zeta", b.zeta},
              {"eps1", b.eps1},         {"eps2", b.eps2},
              {"max_inner", b.max_inner}, {"max_outer", b.max_outer},
              {"sca_tol", b.sca_tol},   {"sca_max_iter", b.sca_max_iter},
              {"sub_tol", b.sub_tol},   {"sub_max_iter", b.sub_max_iter},
              {"starts", b.starts},
              {"subsolver", b.subsolver == DiskSolver::kInteriorPoint ? "interior_point" : "first_order"}};
  const auto& r = s.rcg;
  j["rcg"] = {{"grad_tol", r.grad_tol},   {"max_iter", r.max_iter},
              {"alpha0", r.alpha0},       {"shrink", r.shrink},
              {"armijo_c", r.armijo_c},   {"max_backtracks", r.max_backtracks},
              {"simplex_floor", r.simplex_floor}, {"p_weight", r.p_weight},
              {"q_weight", r.q_weight},   {"starts", r.starts}};
  const auto& p = s.pso;
  j["pso"] = {{"swarm", p.swarm},       {"iterations", p.iterations},
              {"inertia", p.inertia},   {"cognitive", p.cognitive},
              {"social", p.social}};
  const auto& q = s.qsearch;
  j["qsearch"] = {{"bits_phi", q.bits_phi},     {"bits_theta", q.bits_theta},
                  {"group_phi", q.group_phi},   {"group_theta", q.group_theta},
                  {"c_max", q.c_max}};
  j["dynamic"] = {{"starts", s.dynamic_starts}};
  j["elementwise"] = {{"warm_start", s.elementwise_warm_start}};
  if (s.has_robustness)
    j["robustness"] = {{"family", family_name(s.robustness.family)},
                       {"magnitudes", s.robustness.magnitudes},
                       {"trials", s.robustness.trials},
                       {"design", scheme_name(s.robustness.design)}};
  return j;
}

Scenario apply_sweep_value(const Scenario& s, double value) {
  Scenario t = s;
  auto as_int = [&](const char* axis) {
    if (!is_integer(value)) throw ConfigError(std::string(axis) + " sweep needs integer values");
    return static_cast<int>(value);
  };
  switch (s.axis) {
    case SweepAxis::kNone:
      break;
    case SweepAxis::kPower:
      t.channel.power_dbm = value;
      break;
    case SweepAxis::kUsers:
      if (!s.users.explicit_users.empty())
        throw ConfigError("users sweep conflicts with explicit user positions");
      t.users.count = as_int("users");
      if (t.users.count <= 0) throw ConfigError("users sweep needs positive values");
      break;
    case SweepAxis::kMs1Cols:
      t.layout.ms1_cols = as_int("ms1_cols");
      // MS2 cannot be wider than MS1.
      t.layout.ms2_cols = std::min(s.layout.ms2_cols, t.layout.ms1_cols);
      break;
    case SweepAxis::kKappa:
      t.channel.kappa_bs_db = value;
      t.channel.kappa_user_db = {value};
      break;
    case SweepAxis::kAllocation: {
      // j rows of MS1 move to MS2: MS1 keeps (R - j) x C, MS2 becomes
      // (R / 2) x (2 j C / R), so the element count stays R C.
      const int j = as_int("allocation");
      const int R = s.layout.ms1_rows;
      const int C = s.layout.ms1_cols;
      if (j < 0 || j >= R) throw ConfigError("allocation sweep value outside [0, ms1_rows)");
      if (R % 2 != 0) throw ConfigError("allocation sweep needs an even ms1_rows");
      t.layout.ms1_rows = R - j;
      if (j == 0) {
        t.layout.ms2_rows = t.layout.ms2_cols = 0;
      } else {
        if ((2 * j * C) % R != 0)
          throw ConfigError("allocation sweep value gives a fractional MS2 column count");
        t.layout.ms2_rows = R / 2;
        t.layout.ms2_cols = 2 * j * C / R;
      }
      break;
    }
    case SweepAxis::kMs2Size: {
      const int n = as_int("ms2_size");
      if (n < 0) throw ConfigError("ms2_size sweep needs non-negative values");
      t.layout.ms2_rows = t.layout.ms2_cols = n;
      break;
    }
  }
  return t;
}

Instance build_instance(const Scenario& s, std::uint64_t seed) {
  Instance inst;
  inst.layout = build_layout(s.layout);
  ChannelConfig cfg = s.channel;
  if (!s.users.explicit_users.empty()) {
    cfg.users = s.users.explicit_users;
  } else {
    cfg.users = auto_place_users(s.users.count, s.users.elevation, s.users.distance,
                                 s.users.azimuth_min, s.users.azimuth_max, s.users.random,
                                 derive_seed(seed, 0x5553455253ULL));
  }
  inst.stats = make_channel_stats(inst.layout, cfg);
  inst.users = cfg.users;
  inst.patterns = inst.layout.N() == 0 ? std::vector<BeamPattern>{single_layer_pattern(inst.layout.M())}
                                       : enumerate_patterns(inst.layout);
  return inst;
}

}  // namespace mis
