#include "dbands/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "dbands/analysis.hpp"
#include "dbands/band.hpp"
#include "dbands/bloch.hpp"
#include "dbands/catalog.hpp"
#include "dbands/darboux.hpp"
#include "dbands/errors.hpp"
#include "dbands/parallel.hpp"
#include "dbands/specfun.hpp"

namespace dbands::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- options

enum class Kind { Num, Int, Str, Range, NumList, StrList };

struct Opt {
  std::string name;
  Kind kind;
  std::string def;  // empty: no default
  std::string help;
  bool required = false;
};

const std::map<std::string, std::vector<Opt>>& command_table() {
  static const std::map<std::string, std::vector<Opt>> t = {
      {"discriminant",
       {{"E", Kind::Num, "", "single energy"},
        {"range", Kind::Range, "", "energy range lo:hi"},
        {"points", Kind::Int, "401", "samples over the range"}}},
      {"band-edges",
       {{"range", Kind::Range, "", "search range lo:hi", true},
        {"step", Kind::Num, "0.001", "scan step"},
        {"plot-points", Kind::Int, "300", "discriminant samples for the plot"}}},
      {"bloch",
       {{"alpha", Kind::Num, "", "energy", true},
        {"window", Kind::Range, "", "x window lo:hi (default -2T:2T)"},
        {"points", Kind::Int, "801", "samples"}}},
      {"nodal-curves",
       {{"gap", Kind::Range, "", "open gap lo:hi", true},
        {"points", Kind::Int, "40", "alpha samples strictly inside the gap"},
        {"periods", Kind::Int, "1", "number of periods the nodes are replicated over"}}},
      {"darboux1",
       {{"alpha", Kind::Num, "", "factorization energy"},
        {"bloch", Kind::Str, "beta", "beta (|beta|<1) or inv (|beta|>1)"},
        {"kappa", Kind::Num, "", "superposition u^beta + kappa u^(1/beta)"},
        {"seed-gamma", Kind::Num, "", "soliton seed decay rate instead of a Bloch function"},
        {"seed-flavor", Kind::Str, "real-shift", "real-shift or complex-half-period"},
        {"window", Kind::Range, "", "x window lo:hi"},
        {"points", Kind::Int, "1201", "samples"},
        {"iso-points", Kind::Int, "100", "energies for the isospectrality check (0 disables)"}}},
      {"darboux2",
       {{"alpha1", Kind::Num, "", "first factorization energy"},
        {"alpha2", Kind::Num, "", "second factorization energy"},
        {"bloch", Kind::StrList, "beta,inv", "branch per energy: beta or inv"},
        {"kappa1", Kind::Num, "", "superposition coefficient at alpha1"},
        {"kappa2", Kind::Num, "", "superposition coefficient at alpha2"},
        {"seed-gammas", Kind::NumList, "", "soliton seed decay rates g1,g2"},
        {"seed-flavor", Kind::Str, "real-shift", "real-shift or complex-half-period"},
        {"window", Kind::Range, "", "x window lo:hi"},
        {"points", Kind::Int, "1201", "samples"},
        {"iso-points", Kind::Int, "100", "energies for the isospectrality check (0 disables)"}}},
      {"displace",
       {{"alpha", Kind::Num, "", "factorization energy below the spectrum", true},
        {"window", Kind::Range, "", "x window lo:hi"},
        {"points", Kind::Int, "801", "samples"}}},
      {"defect",
       {{"order", Kind::Int, "1", "1 or 2"},
        {"alpha", Kind::Num, "", "energy (order 1)"},
        {"alpha1", Kind::Num, "", "first energy (order 2)"},
        {"alpha2", Kind::Num, "", "second energy (order 2)"},
        {"kappa", Kind::Num, "1", "superposition coefficient (order 1)"},
        {"kappa1", Kind::Num, "1", "superposition coefficient at alpha1"},
        {"kappa2", Kind::Num, "1", "superposition coefficient at alpha2"},
        {"tail", Kind::Num, "", "tail window length (default 2T)"},
        {"window", Kind::Range, "", "x window lo:hi (default -6T:6T)"},
        {"points", Kind::Int, "1201", "samples"}}},
      {"two-soliton-displacement",
       {{"seed-gamma3", Kind::Num, "", "starting gamma3 (default g1 + (g2-g1)/4)"},
        {"grid", Kind::Int, "41", "surface grid size per axis"},
        {"window", Kind::Range, "-15:15", "x window lo:hi"},
        {"points", Kind::Int, "801", "samples"}}},
      {"specfun",
       {{"x", Kind::Num, "0.5", "real argument of sn, cn, dn"},
        {"z", Kind::NumList, "0.3,0.2", "complex argument re,im of the Weierstrass functions"}}},
  };
  return t;
}

const std::map<std::string, std::string>& command_help() {
  static const std::map<std::string, std::string> t = {
      {"discriminant", "trace of the one-period map at one energy or over a range"},
      {"band-edges", "labelled band edges inside a search range"},
      {"bloch", "the two Bloch functions at one energy"},
      {"nodal-curves", "node positions of both Bloch functions across a gap"},
      {"darboux1", "first-order transform from a Bloch function, superposition or soliton seed"},
      {"darboux2", "second-order transform from two Bloch functions, superpositions or seeds"},
      {"displace", "first-order displacement below the spectrum"},
      {"defect", "periodicity defect and injected bound states"},
      {"two-soliton-displacement", "consistent displacement of the 2-soliton well"},
      {"specfun", "elliptic and Weierstrass function values"},
  };
  return t;
}

const std::map<std::string, std::vector<std::string>>& potential_table() {
  static const std::map<std::string, std::vector<std::string>> t = {
      {"free", {"T"}},
      {"lame", {"n", "m"}},
      {"one-soliton", {"gamma0"}},
      {"two-soliton", {"gamma1", "gamma2"}},
      {"collage-soliton1", {"gamma0", "a"}},
      {"collage-soliton2", {"gamma1", "gamma2", "a"}},
  };
  return t;
}

const std::vector<std::string> kPotentialParams{"T", "n", "m", "gamma0", "gamma1", "gamma2", "a"};

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(what + ": not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError(what + ": not a number: '" + s + "'");
  if (!std::isfinite(v)) throw ConfigError(what + ": must be finite");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

json convert(const Opt& o, const std::string& s) {
  const std::string what = "--" + o.name;
  switch (o.kind) {
    case Kind::Num:
      return parse_double(s, what);
    case Kind::Int: {
      const double v = parse_double(s, what);
      if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(what + ": expected an integer");
      return static_cast<long>(v);
    }
    case Kind::Str:
      return s;
    case Kind::Range: {
      const auto p = split(s, ':');
      if (p.size() != 2) throw ConfigError(what + ": expected lo:hi");
      const double lo = parse_double(p[0], what), hi = parse_double(p[1], what);
      if (!(lo < hi)) throw ConfigError(what + ": expected lo < hi");
      return json::array({lo, hi});
    }
    case Kind::NumList: {
      json a = json::array();
      for (const auto& p : split(s, ',')) a.push_back(parse_double(p, what));
      return a;
    }
    case Kind::StrList: {
      json a = json::array();
      for (const auto& p : split(s, ',')) a.push_back(p);
      return a;
    }
  }
  return nullptr;
}

bool finite_number(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

void check_value(const Opt& o, const json& v) {
  const std::string what = "option '" + o.name + "'";
  switch (o.kind) {
    case Kind::Num:
      if (!finite_number(v)) throw ConfigError(what + ": expected a finite number");
      break;
    case Kind::Int:
      if (!v.is_number_integer()) throw ConfigError(what + ": expected an integer");
      break;
    case Kind::Str:
      if (!v.is_string()) throw ConfigError(what + ": expected a string");
      break;
    case Kind::Range:
      if (!v.is_array() || v.size() != 2 || !finite_number(v[0]) || !finite_number(v[1]) ||
          !(v[0].get<double>() < v[1].get<double>()))
        throw ConfigError(what + ": expected [lo, hi] with lo < hi");
      break;
    case Kind::NumList:
      if (!v.is_array() || v.empty()) throw ConfigError(what + ": expected a list of numbers");
      for (const auto& e : v)
        if (!finite_number(e)) throw ConfigError(what + ": expected finite numbers");
      break;
    case Kind::StrList:
      if (!v.is_array() || v.empty()) throw ConfigError(what + ": expected a list of strings");
      for (const auto& e : v)
        if (!e.is_string()) throw ConfigError(what + ": expected strings");
      break;
  }
}

// Fills defaults and validates everything; idempotent.
void normalize(RunConfig& c) {
  const auto& cmds = command_table();
  const auto it = cmds.find(c.command);
  if (it == cmds.end()) throw ConfigError("unknown command '" + c.command + "'");

  const auto& pots = potential_table();
  const auto pk = pots.find(c.potential.kind);
  if (pk == pots.end()) throw ConfigError("unknown potential '" + c.potential.kind + "'");
  for (const auto& [k, v] : c.potential.params) {
    if (std::find(pk->second.begin(), pk->second.end(), k) == pk->second.end())
      throw ConfigError("parameter '" + k + "' does not apply to potential '" + c.potential.kind + "'");
    if (!std::isfinite(v)) throw ConfigError("parameter '" + k + "' must be finite");
  }
  if (c.potential.kind == "lame" && !c.potential.params.count("n")) c.potential.params["n"] = 1.0;

  if (!c.options.is_object()) throw ConfigError("options must be an object");
  for (const auto& [k, v] : c.options.items()) {
    const auto o = std::find_if(it->second.begin(), it->second.end(), [&](const Opt& x) { return x.name == k; });
    if (o == it->second.end()) throw ConfigError("option '" + k + "' does not apply to '" + c.command + "'");
    check_value(*o, v);
  }
  for (const auto& o : it->second) {
    if (c.options.contains(o.name)) continue;
    if (!o.def.empty())
      c.options[o.name] = convert(o, o.def);
    else if (o.required)
      throw ConfigError("'" + c.command + "' requires --" + o.name);
  }

  std::set<std::string> fm(c.formats.begin(), c.formats.end());
  for (const auto& f : fm)
    if (f != "csv" && f != "json" && f != "svg") throw ConfigError("unknown format '" + f + "'");
  c.formats.assign(fm.begin(), fm.end());
  if (c.out_dir.empty()) throw ConfigError("output directory must not be empty");
}

json to_json(const RunConfig& c) {
  json p = json::object();
  for (const auto& [k, v] : c.potential.params) p[k] = v;
  return json{{"command", c.command},
              {"potential", {{"kind", c.potential.kind}, {"params", p}}},
              {"options", c.options},
              {"out_dir", c.out_dir},
              {"formats", c.formats}};
}

// ---------------------------------------------------------------- helpers

class Opts {
 public:
  explicit Opts(const json& j) : j_(j) {}
  bool has(const std::string& k) const { return j_.contains(k); }
  double num(const std::string& k) const {
    if (!has(k)) throw ConfigError("missing --" + k);
    return j_.at(k).get<double>();
  }
  std::optional<double> opt(const std::string& k) const {
    return has(k) ? std::optional<double>(num(k)) : std::nullopt;
  }
  long integer(const std::string& k) const { return j_.at(k).get<long>(); }
  std::string str(const std::string& k) const { return j_.at(k).get<std::string>(); }
  std::optional<Interval> range(const std::string& k) const {
    if (!has(k)) return std::nullopt;
    return Interval{j_.at(k)[0].get<double>(), j_.at(k)[1].get<double>()};
  }
  std::vector<double> nums(const std::string& k) const {
    return has(k) ? j_.at(k).get<std::vector<double>>() : std::vector<double>{};
  }
  std::vector<std::string> strs(const std::string& k) const { return j_.at(k).get<std::vector<std::string>>(); }

 private:
  const json& j_;
};

double param(const PotentialDescriptor& d, const std::string& k) {
  const auto it = d.params.find(k);
  if (it == d.params.end()) throw ConfigError("potential '" + d.kind + "' requires --" + k);
  return it->second;
}

std::vector<double> linspace(double lo, double hi, long n) {
  if (n < 2) throw ConfigError("at least two sample points are needed");
  std::vector<double> g(n);
  for (long i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

std::string num_text(double v) { return format_number(v); }

Evaluable ev(const DarbouxPtr& r) {
  return [r](double x) { return (*r)(x); };
}

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

std::string region_name(double D) {
  if (std::abs(std::abs(D) - 2.0) < kEdgeTol) return "edge";
  return std::abs(D) < 2.0 ? "band" : "gap";
}

catalog::SolitonSeedFlavor flavor_of(const std::string& s) {
  if (s == "real-shift") return catalog::SolitonSeedFlavor::RealShift;
  if (s == "complex-half-period") return catalog::SolitonSeedFlavor::ComplexHalfPeriod;
  throw ConfigError("--seed-flavor must be real-shift or complex-half-period");
}

const BlochFunction& branch(const std::pair<BlochFunction, BlochFunction>& p, const std::string& b) {
  if (b == "beta") return p.second;
  if (b == "inv") return p.first;
  throw ConfigError("--bloch entries must be beta or inv");
}

json bound_json(const BoundStateReport& b, const PotentialSpec& V0) {
  json j{{"energy", b.energy},
         {"accepted", b.accepted},
         {"l2_norm", b.l2_norm},
         {"eigen_residual", b.eigen_residual},
         {"localization_length", b.localization_length},
         {"nested_norms", b.nested_norms}};
  if (V0.period()) {
    const double D = discriminant(V0, b.energy);
    j["D_base"] = D;
    j["region_base"] = region_name(D);
  }
  return j;
}

// ---------------------------------------------------------------- transforms

struct Built {
  DarbouxPtr r;
  bool pure = true;  // no kappa superposition
  std::vector<double> alphas;
  json info = json::object();
  std::optional<double> expected_delta;
};

Built build_order1(const PotentialSpec& V, const PotentialDescriptor& d, const Opts& o,
                   std::optional<double> kappa) {
  Built b;
  if (o.has("seed-gamma")) {
    const double gk = o.num("seed-gamma");
    const auto fl = flavor_of(o.str("seed-flavor"));
    if (d.kind != "one-soliton") throw ConfigError("--seed-gamma needs --potential one-soliton");
    const double g0 = param(d, "gamma0");
    const auto u = catalog::soliton1_bloch_seed(g0, gk, fl);
    b.alphas = {u.alpha()};
    b.expected_delta = catalog::soliton1_shift(g0, gk, fl);
    b.info["seed"] = {{"gamma", gk}, {"flavor", o.str("seed-flavor")}};
    b.r = darboux1(V, u);
    return b;
  }
  if (!o.has("alpha")) throw ConfigError("--alpha or --seed-gamma is required");
  const double alpha = o.num("alpha");
  const auto pair = bloch_pair(V, alpha);
  b.alphas = {alpha};
  b.info["beta"] = complex_json(pair.second.beta);
  if (kappa) {
    b.pure = false;
    b.info["kappa"] = *kappa;
    b.r = darboux1(V, superpose_one(pair.second, pair.first, *kappa));
  } else {
    const std::string br = o.has("bloch") ? o.str("bloch") : "beta";
    b.info["bloch"] = br;
    b.r = darboux1(V, from_bloch(branch(pair, br)));
  }
  return b;
}

Built build_order2(const PotentialSpec& V, const PotentialDescriptor& d, const Opts& o,
                   std::optional<double> k1, std::optional<double> k2) {
  Built b;
  if (o.has("seed-gammas")) {
    const auto g = o.nums("seed-gammas");
    if (g.size() != 2) throw ConfigError("--seed-gammas expects two values");
    std::vector<TransformationFunction> u;
    if (d.kind == "one-soliton") {
      const auto fl = flavor_of(o.str("seed-flavor"));
      for (double gk : g) u.push_back(catalog::soliton1_bloch_seed(param(d, "gamma0"), gk, fl));
    } else if (d.kind == "two-soliton") {
      for (double gk : g) u.push_back(catalog::two_soliton_seed(param(d, "gamma1"), param(d, "gamma2"), gk));
    } else {
      throw ConfigError("--seed-gammas needs --potential one-soliton or two-soliton");
    }
    b.alphas = {u[0].alpha(), u[1].alpha()};
    b.info["seed_gammas"] = g;
    b.r = darboux2(V, u[0], u[1]);
    return b;
  }
  if (!o.has("alpha1") || !o.has("alpha2")) throw ConfigError("--alpha1 and --alpha2 are required");
  const double a1 = o.num("alpha1"), a2 = o.num("alpha2");
  const auto p1 = bloch_pair(V, a1), p2 = bloch_pair(V, a2);
  b.alphas = {a1, a2};
  b.info["beta1"] = complex_json(p1.second.beta);
  b.info["beta2"] = complex_json(p2.second.beta);
  if (k1 || k2) {
    b.pure = false;
    const auto s = theorem1_normalize({p1.second, p1.first}, {p2.second, p2.first}, k1.value_or(0.0),
                                      k2.value_or(0.0));
    b.info["kappa1"] = s.kappa1;
    b.info["kappa2"] = s.kappa2;
    const auto [v1, v2] = superpose(s);
    b.r = darboux2(V, v1, v2);
  } else {
    const auto br = o.strs("bloch");
    if (br.size() != 2) throw ConfigError("--bloch expects two entries, e.g. beta,inv");
    b.info["bloch"] = br;
    b.r = darboux2(V, from_bloch(branch(p1, br[0])), from_bloch(branch(p2, br[1])));
  }
  return b;
}

// Shared reporting for darboux1 / darboux2 / defect.
void report_transform(const Built& b, const PotentialSpec& V, const Opts& o, ResultBundle& out,
                      bool defect_mode) {
  const auto T = V.period();
  json& data = out.data;
  data["order"] = b.r->order();
  data["alphas"] = b.alphas;
  data["transform"] = b.info;

  Interval win = b.r->window();
  if (T) win = defect_mode ? Interval{-6 * *T, 6 * *T} : Interval{-4 * *T, 4 * *T};
  if (auto w = o.range("window")) win = *w;
  const auto xs = linspace(win.lo, win.hi, o.integer("points"));

  std::optional<double> delta;
  std::ostringstream sum;
  if (b.pure) {
    DisplacementReport rep;
    if (T)
      rep = detect_displacement(V, ev(b.r), {-3 * *T, 3 * *T});
    else
      rep = detect_displacement(V, ev(b.r), win, win);
    delta = rep.delta;
    data["displacement"] = {{"delta", rep.delta},
                            {"residual_sup", rep.residual_sup},
                            {"window", {rep.window.lo, rep.window.hi}}};
    if (T) data["displacement"]["half_period"] = *T / 2;
    if (b.expected_delta) data["displacement"]["closed_form_delta"] = *b.expected_delta;
    sum << "delta = " << num_text(rep.delta) << "\nresidual = " << num_text(rep.residual_sup) << "\n";
    if (T && o.has("iso-points") && o.integer("iso-points") > 0) {
      const double lo = *std::min_element(b.alphas.begin(), b.alphas.end()) - 1.0;
      const double hi = *std::max_element(b.alphas.begin(), b.alphas.end()) + 3.0;
      const auto es = linspace(lo, hi, o.integer("iso-points"));
      const double iso = isospectrality_check(V, as_potential(b.r, *T), es);
      data["isospectrality"] = {{"max_abs_D_difference", iso}, {"energies", {lo, hi}}, {"points", es.size()}};
      sum << "isospectrality = " << num_text(iso) << "\n";
    }
  } else {
    const double unit = T ? *T : 1.0;
    const double tail = o.opt("tail").value_or(2 * unit);
    const auto rep = asymptotic_displacements(V, ev(b.r), tail);
    json bs = json::array();
    for (const auto& s : injected_states(*b.r)) bs.push_back(bound_json(bound_state_check(*b.r, s, unit), V));
    data["defect"] = {{"delta_minus", rep.delta_minus},
                      {"delta_plus", rep.delta_plus},
                      {"residual_minus", rep.residual_minus},
                      {"residual_plus", rep.residual_plus},
                      {"tail_offset", rep.offset},
                      {"tail_length", tail}};
    data["bound_states"] = bs;
    sum << "delta- = " << num_text(rep.delta_minus) << "\ndelta+ = " << num_text(rep.delta_plus) << "\n";
    for (const auto& s : bs)
      sum << "bound state E = " << num_text(s["energy"].get<double>())
          << (s["accepted"].get<bool>() ? " accepted" : " rejected") << "\n";
  }

  Table pot{"potential", {"x [length]", "V0 [energy]", "V1 [energy]"}, {}};
  if (delta) pot.columns.push_back("V0(x+delta) [energy]");
  std::vector<double> v0(xs.size()), v1(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    v0[i] = V(xs[i]);
    v1[i] = (*b.r)(xs[i]);
    std::vector<std::string> row{num_text(xs[i]), num_text(v0[i]), num_text(v1[i])};
    if (delta) row.push_back(num_text(V(xs[i] + *delta)));
    pot.rows.push_back(std::move(row));
  }
  out.tables.push_back(std::move(pot));
  out.plots.push_back({"potential", svg_plot("Darboux partner", "x", "V", {{"V0", xs, v0}, {"V1", xs, v1}})});

  if (!b.pure) {
    const auto states = injected_states(*b.r);
    Table st{"states", {"x [length]"}, {}};
    std::vector<Series> ser;
    for (std::size_t k = 0; k < states.size(); ++k) {
      st.columns.push_back("phi" + std::to_string(k + 1) + " [unnormalized amplitude]");
      ser.push_back({"E = " + num_text(states[k].energy), xs, std::vector<double>(xs.size())});
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::vector<std::string> row{num_text(xs[i])};
      for (std::size_t k = 0; k < states.size(); ++k) {
        const double v = states[k].phi(xs[i]).value();
        ser[k].y[i] = v;
        row.push_back(num_text(v));
      }
      st.rows.push_back(std::move(row));
    }
    out.tables.push_back(std::move(st));
    if (!ser.empty()) out.plots.push_back({"states", svg_plot("Injected states", "x", "phi", ser)});
  }
  out.summary = sum.str();
}

// ---------------------------------------------------------------- commands

void cmd_discriminant(const PotentialSpec& V, const Opts& o, ResultBundle& out) {
  const double T = require_period(V);
  out.data["period"] = T;
  if (o.has("E")) {
    const double E = o.num("E");
    const double D = discriminant(V, E);
    const auto [bp, bm] = floquet_multipliers(D);
    out.data["E"] = E;
    out.data["D"] = D;
    out.data["beta_plus"] = complex_json(bp);
    out.data["beta_minus"] = complex_json(bm);
    out.data["region"] = region_name(D);
    out.tables.push_back({"value", {"E [energy]", "D [trace of the period map]"}, {{num_text(E), num_text(D)}}});
    out.summary = "D = " + num_text(D) + "\n";
    return;
  }
  const auto r = o.range("range");
  if (!r) throw ConfigError("discriminant needs --E or --range");
  const auto es = linspace(r->lo, r->hi, o.integer("points"));
  const auto ds = parallel_map<double>(es.size(), [&](std::size_t i) { return discriminant(V, es[i]); });
  Table t{"curve", {"E [energy]", "D [trace of the period map]"}, {}};
  for (std::size_t i = 0; i < es.size(); ++i) t.rows.push_back({num_text(es[i]), num_text(ds[i])});
  out.tables.push_back(std::move(t));
  out.data["points"] = es.size();
  out.data["D_min"] = *std::min_element(ds.begin(), ds.end());
  out.data["D_max"] = *std::max_element(ds.begin(), ds.end());
  out.plots.push_back({"curve", svg_plot("Discriminant", "E", "D(E)", {{"D", es, ds}}, {-2.0, 2.0})});
  out.summary = "sampled " + std::to_string(es.size()) + " energies\n";
}

void cmd_band_edges(const PotentialSpec& V, const Opts& o, ResultBundle& out) {
  const auto r = *o.range("range");
  const auto bands = find_band_edges(V, r, o.num("step"));
  Table t{"edges", {"label [edge name]", "j [gap index]", "primed [0 lower / 1 upper]", "E [energy]", "D [trace at the edge]"}, {}};
  json arr = json::array();
  std::ostringstream sum;
  std::vector<double> ex, ey;
  for (const auto& e : bands.edges) {
    t.rows.push_back({e.label(), std::to_string(e.index), e.primed ? "1" : "0", num_text(e.E), num_text(e.D)});
    arr.push_back({{"label", e.label()}, {"j", e.index}, {"primed", e.primed}, {"E", e.E}, {"D", e.D}});
    sum << e.label() << " " << num_text(e.E) << "\n";
    ex.push_back(e.E);
    ey.push_back(e.D);
  }
  out.tables.push_back(std::move(t));
  out.data["edges"] = arr;
  out.data["range"] = {r.lo, r.hi};
  out.data["degenerate_warning"] = bands.degenerate_warning;
  out.data["warnings"] = bands.warnings;
  out.warnings = bands.warnings;
  const long np = o.integer("plot-points");
  if (np >= 2) {
    const auto es = linspace(r.lo, r.hi, np);
    const auto ds = parallel_map<double>(es.size(), [&](std::size_t i) { return discriminant(V, es[i]); });
    out.plots.push_back({"discriminant",
                         svg_plot("Band edges", "E", "D(E)", {{"D", es, ds}, {"edges", ex, ey, true}}, {-2.0, 2.0})});
  }
  out.summary = sum.str();
}

void cmd_bloch(const PotentialSpec& V, const Opts& o, ResultBundle& out) {
  const double T = require_period(V);
  const double alpha = o.num("alpha");
  const auto pair = bloch_pair(V, alpha);
  const Interval w = o.range("window").value_or(Interval{-2 * T, 2 * T});
  const auto xs = linspace(w.lo, w.hi, o.integer("points"));
  const double D = discriminant(V, alpha);
  out.data["alpha"] = alpha;
  out.data["D"] = D;
  out.data["region"] = region_name(D);
  out.data["beta"] = complex_json(pair.second.beta);
  out.data["beta_inv"] = complex_json(pair.first.beta);
  if (pair.first.is_real()) {
    Table t{"functions",
            {"x [length]", "u_beta [|beta|<1 branch]", "du_beta [derivative]", "u_inv [|beta|>1 branch]", "du_inv [derivative]"},
            {}};
    std::vector<double> yb(xs.size()), yi(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto b = bloch_extend(pair.second, xs[i]), v = bloch_extend(pair.first, xs[i]);
      yb[i] = b.psi;
      yi[i] = v.psi;
      t.rows.push_back({num_text(xs[i]), num_text(b.psi), num_text(b.dpsi), num_text(v.psi), num_text(v.dpsi)});
    }
    out.tables.push_back(std::move(t));
    out.plots.push_back({"functions", svg_plot("Bloch functions", "x", "u", {{"u_beta", xs, yb}, {"u_inv", xs, yi}})});
  } else {
    Table t{"functions", {"x [length]", "re_u [real part]", "im_u [imaginary part]", "abs_u [modulus]"}, {}};
    std::vector<double> re(xs.size()), im(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto [a, c] = pair.second.complex_value(xs[i]);
      re[i] = a.psi;
      im[i] = c.psi;
      t.rows.push_back({num_text(xs[i]), num_text(a.psi), num_text(c.psi), num_text(std::hypot(a.psi, c.psi))});
    }
    out.tables.push_back(std::move(t));
    out.plots.push_back({"functions", svg_plot("Bloch function", "x", "u", {{"Re u", xs, re}, {"Im u", xs, im}})});
  }
  out.summary = "beta = " + num_text(pair.second.beta.real()) + " " + num_text(pair.second.beta.imag()) + "i\n";
}

void cmd_nodal(const PotentialSpec& V, const Opts& o, ResultBundle& out) {
  const double T = require_period(V);
  const auto gap = *o.range("gap");
  const long n = o.integer("points"), periods = o.integer("periods");
  if (n < 1 || periods < 1) throw ConfigError("--points and --periods must be positive");
  std::vector<double> alphas(n);
  for (long i = 0; i < n; ++i) alphas[i] = gap.lo + (gap.hi - gap.lo) * (i + 1.0) / (n + 1.0);
  const auto rows = nodal_curves(V, gap, alphas);
  Table t{"nodes", {"alpha [energy]", "branch [0 |beta|<1 / 1 |beta|>1]", "x [node position]"}, {}};
  Series sb{"u_beta", {}, {}, true}, si{"u_inv", {}, {}, true};
  json arr = json::array();
  for (const auto& r : rows) {
    // nodes_inv holds the |beta|<1 branch
    for (long k = 0; k < periods; ++k) {
      for (double x : r.nodes_inv) {
        t.rows.push_back({num_text(r.alpha), "0", num_text(x + k * T)});
        sb.x.push_back(x + k * T);
        sb.y.push_back(r.alpha);
      }
      for (double x : r.nodes_beta) {
        t.rows.push_back({num_text(r.alpha), "1", num_text(x + k * T)});
        si.x.push_back(x + k * T);
        si.y.push_back(r.alpha);
      }
    }
    arr.push_back({{"alpha", r.alpha}, {"nodes_beta", r.nodes_inv}, {"nodes_inv", r.nodes_beta}});
  }
  out.tables.push_back(std::move(t));
  out.data["period"] = T;
  out.data["gap"] = {gap.lo, gap.hi};
  out.data["rows"] = arr;
  out.plots.push_back({"nodes", svg_plot("Nodal curves", "x", "alpha", {sb, si})});
  out.summary = std::to_string(rows.size()) + " energies\n";
}

void cmd_displace(const PotentialSpec& V, const PotentialDescriptor& d, const Opts& o, ResultBundle& out) {
  const double T = require_period(V);
  const double alpha = o.num("alpha");
  const auto pair = bloch_pair(V, alpha);
  const auto ub = from_bloch(pair.second), ui = from_bloch(pair.first);
  const auto g = linspace(-2 * T, 2 * T, 401);
  const auto [dbest, crep] = theorem2_best_delta(ub, ui, T, g);
  out.data["alpha"] = alpha;
  out.data["theorem2"] = {{"delta", dbest}, {"c", crep.c}, {"relative_variation", crep.relative_variation}};
  if (d.kind == "lame" && static_cast<int>(param(d, "n")) == 1) {
    const specfun::WeierstrassLattice lat(specfun::EllipticParameter(param(d, "m")));
    out.data["theorem2"]["closed_form_delta"] = catalog::lame_displacement_for(alpha, lat).real();
  }
  const auto r = darboux1(V, ub);
  const auto rep = detect_displacement(V, ev(r), {-3 * T, 3 * T});
  out.data["displacement"] = {{"delta", rep.delta}, {"residual_sup", rep.residual_sup}};

  const Interval w = o.range("window").value_or(Interval{-3 * T, 3 * T});
  const auto xs = linspace(w.lo, w.hi, o.integer("points"));
  Table t{"potential", {"x [length]", "V0 [energy]", "V1 [energy]", "V0(x+delta) [energy]"}, {}};
  std::vector<double> v0(xs.size()), v1(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    v0[i] = V(xs[i]);
    v1[i] = (*r)(xs[i]);
    t.rows.push_back({num_text(xs[i]), num_text(v0[i]), num_text(v1[i]), num_text(V(xs[i] + rep.delta))});
  }
  out.tables.push_back(std::move(t));
  out.plots.push_back({"potential", svg_plot("Displaced partner", "x", "V", {{"V0", xs, v0}, {"V1", xs, v1}})});
  out.summary = "theorem-2 delta = " + num_text(dbest) + "\ndetected delta = " + num_text(rep.delta) +
                "\nresidual = " + num_text(rep.residual_sup) + "\n";
}

void cmd_two_soliton(const PotentialSpec& V, const PotentialDescriptor& d, const Opts& o, ResultBundle& out) {
  if (d.kind != "two-soliton") throw ConfigError("two-soliton-displacement needs --potential two-soliton");
  const double g1 = param(d, "gamma1"), g2 = param(d, "gamma2");
  const double seed = o.opt("seed-gamma3").value_or(g1 + 0.25 * (g2 - g1));
  const auto c = catalog::find_consistent_displacement(g1, g2, seed);
  const auto s = catalog::two_soliton_displacement(g1, g2, c.gamma3, c.gamma4);
  const auto u3 = catalog::two_soliton_seed(g1, g2, c.gamma3), u4 = catalog::two_soliton_seed(g1, g2, c.gamma4);
  const auto r = darboux2(V, u3, u4);

  const auto w = *o.range("window");
  const auto xs = linspace(w.lo, w.hi, o.integer("points"));
  double sup = 0.0, wrel = 0.0;
  Table pot{"potential", {"x [length]", "V0 [energy]", "V1 [energy]", "V0(x+delta) [energy]"}, {}};
  std::vector<double> v0(xs.size()), v1(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    v0[i] = V(x);
    v1[i] = (*r)(x);
    const double sh = V(x + c.delta);
    sup = std::max(sup, std::abs(v1[i] - sh));
    const ScaledValue wn = wronskian(u3(x), u4(x));
    const ScaledValue wc = catalog::two_soliton_displaced_wronskian(g1, g2, c.gamma3, c.gamma4, c.delta, x);
    wrel = std::max(wrel, std::abs(wn.value / wc.value * std::exp(wn.log_scale - wc.log_scale) - 1.0));
    pot.rows.push_back({num_text(x), num_text(v0[i]), num_text(v1[i]), num_text(sh)});
  }
  out.tables.push_back(std::move(pot));
  out.data["solution"] = {{"gamma1", g1}, {"gamma2", g2}, {"gamma3", c.gamma3}, {"gamma4", c.gamma4},
                          {"delta", c.delta}, {"deltaA", s.deltaA}, {"deltaB", s.deltaB}, {"Gamma", s.Gamma},
                          {"deltaA_minus_deltaB", s.deltaA - s.deltaB}};
  out.data["checks"] = {{"shift_sup_error", sup}, {"wronskian_relative_error", wrel}};

  const long n = o.integer("grid");
  if (n < 2) throw ConfigError("--grid must be at least 2");
  Table surf{"surfaces", {"gamma3 [decay rate]", "gamma4 [decay rate]", "deltaA [length]", "deltaB [length]", "region [1 2 3 or 0]"}, {}};
  const double top = 1.5 * g2;
  for (long i = 1; i <= n; ++i)
    for (long j = 1; j <= n; ++j) {
      const double a = top * i / n, b = top * j / n;
      const auto q = catalog::two_soliton_displacement(g1, g2, a, b);
      const int reg = q.region == catalog::DisplacementRegion::Omega1   ? 1
                      : q.region == catalog::DisplacementRegion::Omega2 ? 2
                      : q.region == catalog::DisplacementRegion::Omega3 ? 3
                                                                         : 0;
      surf.rows.push_back({num_text(a), num_text(b), num_text(q.deltaA), num_text(q.deltaB), std::to_string(reg)});
    }
  out.tables.push_back(std::move(surf));

  // slice through the solution at fixed gamma3, gamma4 across (g1, g2)
  std::vector<double> sx, sa, sb;
  for (int k = 1; k < 200; ++k) {
    const double b = g1 + (g2 - g1) * k / 200.0;
    const auto q = catalog::two_soliton_displacement(g1, g2, c.gamma3, b);
    sx.push_back(b);
    sa.push_back(q.deltaA);
    sb.push_back(q.deltaB);
  }
  out.plots.push_back({"slice", svg_plot("Displacement surfaces at fixed gamma3", "gamma4", "delta",
                                         {{"deltaA", sx, sa}, {"deltaB", sx, sb}})});
  out.plots.push_back({"potential", svg_plot("Second-order partner", "x", "V", {{"V0", xs, v0}, {"V1", xs, v1}})});
  out.summary = "gamma3 = " + num_text(c.gamma3) + "\ngamma4 = " + num_text(c.gamma4) + "\ndelta = " +
                num_text(c.delta) + "\nshift error = " + num_text(sup) + "\n";
}

void cmd_specfun(const PotentialDescriptor& d, const Opts& o, ResultBundle& out) {
  const specfun::EllipticParameter m(param(d, "m"));
  const auto q = specfun::complete_elliptic(m);
  const double x = o.num("x");
  const auto z3 = o.nums("z");
  if (z3.size() != 2) throw ConfigError("--z expects re,im");
  const std::complex<double> z(z3[0], z3[1]);
  const auto j = specfun::jacobi_sn_cn_dn(x, m);
  const specfun::WeierstrassLattice lat(m);
  const auto P = specfun::weierstrass_p(z, lat), Z = specfun::weierstrass_zeta(z, lat),
             S = specfun::weierstrass_sigma(z, lat);
  out.data = {{"m", m.value()},
              {"K", q.K},
              {"Kprime", q.Kprime},
              {"omega", lat.omega()},
              {"omega_prime_im", lat.omega_prime_im()},
              {"roots", lat.roots()},
              {"eta", lat.eta()},
              {"x", x},
              {"sn", j.sn},
              {"cn", j.cn},
              {"dn", j.dn},
              {"z", {z.real(), z.imag()}},
              {"p", complex_json(P)},
              {"zeta", complex_json(Z)},
              {"sigma", complex_json(S)}};
  Table t{"values", {"name [quantity]", "re [value]", "im [value]"}, {}};
  auto add = [&](const std::string& n, std::complex<double> v) {
    t.rows.push_back({n, num_text(v.real()), num_text(v.imag())});
  };
  add("K", q.K);
  add("Kprime", q.Kprime);
  add("e1", lat.roots()[0]);
  add("e2", lat.roots()[1]);
  add("e3", lat.roots()[2]);
  add("sn", j.sn);
  add("cn", j.cn);
  add("dn", j.dn);
  add("p", P);
  add("zeta", Z);
  add("sigma", S);
  out.tables.push_back(std::move(t));
  std::ostringstream s;
  s << "K = " << num_text(q.K) << "\nK' = " << num_text(q.Kprime) << "\n";
  out.summary = s.str();
}

std::string svg_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '&') o += "&amp;";
    else if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else o += c;
  }
  return o;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << s;
}

json meta_of(const RunConfig& cfg) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"command", cfg.command}, {"config", to_json(cfg)}};
}

}  // namespace

// ---------------------------------------------------------------- public

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> keys{"command", "potential", "options", "out_dir", "formats"};
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw ConfigError("unknown config key '" + k + "'");
  RunConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    const auto& p = j.at("potential");
    c.potential.kind = p.at("kind").get<std::string>();
    c.potential.params.clear();
    if (p.contains("params"))
      for (const auto& [k, v] : p.at("params").items()) {
        if (!finite_number(v)) throw ConfigError("parameter '" + k + "' must be a finite number");
        c.potential.params[k] = v.get<double>();
      }
    if (j.contains("options")) c.options = j.at("options");
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("formats")) c.formats = j.at("formats").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  normalize(c);
  return c;
}

std::string serialize(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

RunConfig config_from_args(int argc, const char* const* argv, std::string* help) {
  CLI::App app{"Band structures and Darboux transformations of periodic Schrodinger operators",
               kToolName};
  app.set_version_flag("--version", std::string(kToolVersion));
  std::string config_file;
  app.add_option("--config", config_file, "replay a config.json written by an earlier run");
  app.require_subcommand(0, 1);

  struct Slot {
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::string potential, out = "out", formats = "csv,json,svg";
  };
  std::map<std::string, Slot> slots;
  for (const auto& [name, opts] : command_table()) {
    auto& s = slots[name];
    s.app = app.add_subcommand(name, command_help().at(name));
    s.app->add_option("--potential", s.potential,
                      "free | lame | one-soliton | two-soliton | collage-soliton1 | collage-soliton2");
    for (const auto& p : kPotentialParams) s.values["@" + p];
    for (const auto& p : kPotentialParams) s.app->add_option("--" + p, s.values["@" + p], "potential parameter " + p);
    s.app->add_option("--out", s.out, "output directory")->capture_default_str();
    s.app->add_option("--format", s.formats, "subset of csv,json,svg")->capture_default_str();
    for (const auto& o : opts) s.values[o.name];
    for (const auto& o : opts) {
      std::string h = o.help;
      if (!o.def.empty()) h += " (default " + o.def + ")";
      s.app->add_option("--" + o.name, s.values[o.name], h);
    }
  }

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::CallForHelp&) {
    if (help) *help = app.help();
    return {};
  } catch (const CLI::CallForAllHelp&) {
    if (help) *help = app.help("", CLI::AppFormatMode::All);
    return {};
  } catch (const CLI::CallForVersion&) {
    if (help) *help = std::string(kToolName) + " " + kToolVersion + "\n";
    return {};
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string(e.what()) + "\n\n" + app.help());
  }

  const auto chosen = app.get_subcommands();
  if (!config_file.empty()) {
    if (!chosen.empty()) throw ConfigError("--config cannot be combined with a subcommand");
    std::ifstream f(config_file);
    if (!f) throw ConfigError("cannot read " + config_file);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
  }
  if (chosen.empty()) throw ConfigError("a subcommand is required\n\n" + app.help());

  RunConfig c;
  c.command = chosen.front()->get_name();
  auto& s = slots.at(c.command);
  c.potential.kind = !s.potential.empty() ? s.potential
                     : c.command == "two-soliton-displacement" ? "two-soliton"
                                                                : "lame";
  for (const auto& p : kPotentialParams)
    if (s.app->count("--" + p)) c.potential.params[p] = parse_double(s.values["@" + p], "--" + p);
  for (const auto& o : command_table().at(c.command))
    if (s.app->count("--" + o.name)) c.options[o.name] = convert(o, s.values[o.name]);
  c.out_dir = s.out;
  c.formats = split(s.formats, ',');
  normalize(c);
  return c;
}

PotentialSpec build_potential(const PotentialDescriptor& d) {
  const auto& k = d.kind;
  if (k == "free") {
    const auto it = d.params.find("T");
    return make_free(it == d.params.end() ? std::nullopt : std::optional<double>(it->second));
  }
  if (k == "lame") {
    const double n = param(d, "n");
    if (n != std::floor(n)) throw ConfigError("--n must be an integer");
    return catalog::make_lame(static_cast<int>(n), param(d, "m"));
  }
  if (k == "one-soliton") return catalog::make_one_soliton(param(d, "gamma0"));
  if (k == "two-soliton") return catalog::make_two_soliton(param(d, "gamma1"), param(d, "gamma2"));
  if (k == "collage-soliton1")
    return catalog::periodize(catalog::make_one_soliton(param(d, "gamma0")), param(d, "a"));
  if (k == "collage-soliton2") {
    const double g1 = param(d, "gamma1"), g2 = param(d, "gamma2");
    if (d.params.count("a")) return catalog::periodize(catalog::make_two_soliton(g1, g2), param(d, "a"));
    return catalog::collage_two_soliton(g1, g2).potential;
  }
  throw ConfigError("unknown potential '" + k + "'");
}

ResultBundle execute(const RunConfig& cfg) {
  ResultBundle out;
  out.meta = meta_of(cfg);
  out.data = json::object();
  const Opts o(cfg.options);
  const auto& d = cfg.potential;

  if (cfg.command == "specfun") {
    try {
      cmd_specfun(d, o, out);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    return out;
  }

  std::optional<PotentialSpec> Vopt;
  try {
    Vopt = build_potential(d);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const PotentialSpec& V = *Vopt;
  out.data["potential"] = V.describe();
  if (d.kind == "collage-soliton2" && !d.params.count("a"))
    out.data["collage_a"] = catalog::collage_two_soliton(param(d, "gamma1"), param(d, "gamma2")).a;

  const auto& c = cfg.command;
  if (c == "discriminant") {
    cmd_discriminant(V, o, out);
  } else if (c == "band-edges") {
    cmd_band_edges(V, o, out);
  } else if (c == "bloch") {
    cmd_bloch(V, o, out);
  } else if (c == "nodal-curves") {
    cmd_nodal(V, o, out);
  } else if (c == "darboux1") {
    report_transform(build_order1(V, d, o, o.opt("kappa")), V, o, out, false);
  } else if (c == "darboux2") {
    report_transform(build_order2(V, d, o, o.opt("kappa1"), o.opt("kappa2")), V, o, out, false);
  } else if (c == "defect") {
    const long order = o.integer("order");
    if (order == 1)
      report_transform(build_order1(V, d, o, o.num("kappa")), V, o, out, true);
    else if (order == 2)
      report_transform(build_order2(V, d, o, o.num("kappa1"), o.num("kappa2")), V, o, out, true);
    else
      throw ConfigError("--order must be 1 or 2");
  } else if (c == "displace") {
    cmd_displace(V, d, o, out);
  } else if (c == "two-soliton-displacement") {
    cmd_two_soliton(V, d, o, out);
  } else {
    throw ConfigError("unknown command '" + c + "'");
  }
  return out;
}

std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  return os.str();
}

void write_bundle(const ResultBundle& b, const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_text(dir / "config.json", serialize(cfg));
  const auto want = [&](const char* f) {
    return std::find(cfg.formats.begin(), cfg.formats.end(), f) != cfg.formats.end();
  };
  if (want("json")) write_text(dir / (cfg.command + ".json"), json{{"meta", b.meta}, {"data", b.data}}.dump(2) + "\n");
  if (want("csv"))
    for (const auto& t : b.tables) write_text(dir / (cfg.command + "_" + t.name + ".csv"), to_csv(t));
  if (want("svg"))
    for (const auto& p : b.plots) write_text(dir / (cfg.command + "_" + p.name + ".svg"), p.svg);
}

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, const std::vector<double>& hlines) {
  constexpr double W = 720, H = 440, L = 80, R = 150, Tm = 40, B = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i]);
        y1 = std::max(y1, s.y[i]);
      }
  for (double h : hlines)
    if (std::isfinite(y0)) {
      y0 = std::min(y0, h);
      y1 = std::max(y1, h);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 1, x1 += 1;
  if (y1 == y0) y0 -= 1, y1 += 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tm - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<!-- " << kToolName << " " << kToolVersion << ", generated " << utc_now() << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << (L + (W - L - R) / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << svg_escape(title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << (W - L - R) << "\" height=\"" << (H - Tm - B)
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  const auto ticks = [](double lo, double hi) {
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double step = (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
      t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
  };
  for (double t : ticks(x0, x1)) {
    os << "<line x1=\"" << px(t) << "\" y1=\"" << (H - B) << "\" x2=\"" << px(t) << "\" y2=\"" << (H - B + 5)
       << "\" stroke=\"black\"/>";
    os << "<text x=\"" << px(t) << "\" y=\"" << (H - B + 18) << "\" text-anchor=\"middle\">" << t << "</text>\n";
  }
  for (double t : ticks(y0, y1)) {
    os << "<line x1=\"" << (L - 5) << "\" y1=\"" << py(t) << "\" x2=\"" << L << "\" y2=\"" << py(t)
       << "\" stroke=\"black\"/>";
    os << "<text x=\"" << (L - 8) << "\" y=\"" << (py(t) + 4) << "\" text-anchor=\"end\">" << t << "</text>\n";
  }
  os << "<text x=\"" << (L + (W - L - R) / 2) << "\" y=\"" << (H - 15) << "\" text-anchor=\"middle\">"
     << svg_escape(xlabel) << "</text>\n";
  os << "<text x=\"20\" y=\"" << (Tm + (H - Tm - B) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << (Tm + (H - Tm - B) / 2) << ")\">" << svg_escape(ylabel) << "</text>\n";
  for (double h : hlines)
    if (h >= y0 && h <= y1)
      os << "<line x1=\"" << L << "\" y1=\"" << py(h) << "\" x2=\"" << (W - R) << "\" y2=\"" << py(h)
         << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 6];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.points) {
      for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2\" fill=\"" << col << "\"/>\n";
    } else {
      std::ostringstream pts;
      pts << std::setprecision(6);
      auto flush = [&] {
        if (!pts.str().empty())
          os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.2\" points=\"" << pts.str()
             << "\"/>\n";
        pts.str("");
      };
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
          flush();
          continue;
        }
        pts << px(s.x[i]) << "," << py(s.y[i]) << " ";
      }
      flush();
    }
    const double ly = Tm + 16 + 18 * k;
    os << "<rect x=\"" << (W - R + 12) << "\" y=\"" << (ly - 8) << "\" width=\"12\" height=\"8\" fill=\"" << col
       << "\"/><text x=\"" << (W - R + 30) << "\" y=\"" << ly << "\">" << svg_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    std::string help;
    cfg = config_from_args(argc, argv, &help);
    if (!help.empty()) {
      out << help;
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  ResultBundle b;
  try {
    b = execute(cfg);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    json ej{{"name", e.name()}, {"message", e.what()}};
    if (const auto* s = dynamic_cast<const SingularTransform*>(&e)) ej["nodes"] = s->nodes();
    err << e.name() << ": " << e.what() << "\n";
    try {
      std::filesystem::create_directories(cfg.out_dir);
      write_text(std::filesystem::path(cfg.out_dir) / "config.json", serialize(cfg));
      write_text(std::filesystem::path(cfg.out_dir) / (cfg.command + ".json"),
                 json{{"meta", meta_of(cfg)}, {"error", ej}}.dump(2) + "\n");
    } catch (const std::exception& w) {
      err << "error: " << w.what() << "\n";
    }
    return 3;
  }

  for (const auto& w : b.warnings) err << "warning: " << w << "\n";
  try {
    write_bundle(b, cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  out << b.summary;
  return 0;
}

}  // namespace dbands::cli
