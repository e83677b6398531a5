// Command-line front end: state generation, entanglement-feature learning,
// scans, distances, the stress map, spectra, and the disentangler. Every run
// writes resolved-config.json next to its outputs so it can be reproduced
// bit for bit from the same seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eftci/disentangler.hpp"
#include "eftci/ef_analysis.hpp"
#include "eftci/partitions.hpp"
#include "eftci/purity_oracles.hpp"
#include "eftci/state_zoo.hpp"
#include "eftci/tt_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eftci;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
}

void write_resolved_config(const fs::path& out_path, const std::string& command, const json& flags) {
  json j;
  j["command"] = command;
  j["flags"] = flags;
  const fs::path dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
  write_text(dir / "resolved-config.json", j.dump(1) + "\n");
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

int resolve_threads(int flag_value) {
  if (const char* env = std::getenv("EFTCI_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return flag_value;
}

ModelSpec spec_from_flags(const std::string& family, int L, std::uint64_t seed,
                          const std::string& target, const std::map<std::string, double>& params) {
  ModelSpec spec;
  spec.family = family;
  spec.L = L;
  spec.seed = seed;
  spec.target = target;
  spec.params = params;
  return spec;
}

// --- state gen --------------------------------------------------------------

int cmd_state_gen(const std::string& family, int L, std::uint64_t seed, const std::string& target,
                  const std::map<std::string, double>& params, const std::string& out) {
  ModelSpec spec = spec_from_flags(family, L, seed, target, params);
  GeneratedState st = generate_state(spec);
  const fs::path out_path(out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  if (st.mps) {
    save_tt(*st.mps, out);
  } else {
    save_dense_state(*st.dense, out);
  }
  json meta = spec.to_json();
  meta["fermionic"] = st.fermionic;
  meta["format"] = st.mps ? "tt" : "dense";
  if (spec.family == "tfim" || spec.family == "gue_h" || spec.family == "syk") meta["energy"] = st.energy;
  write_text(out_path.string() + ".meta.json", meta.dump(1) + "\n");

  json flags;
  flags["family"] = family;
  flags["L"] = L;
  flags["seed"] = seed;
  flags["target"] = target;
  flags["params"] = params;
  flags["out"] = out;
  write_resolved_config(out_path, "state gen", flags);
  return 0;
}

// --- shared backend loading -------------------------------------------------

std::shared_ptr<CachedPurity> load_backend(const std::string& source, int L_hint, int d_hint) {
  auto make_dense = [](const std::string& path) {
    DenseState st = load_dense_state(path);
    bool fermionic = false;
    const std::string meta_path = path + ".meta.json";
    if (fs::exists(meta_path)) {
      json meta = load_json_file(meta_path);
      fermionic = meta.value("fermionic", false);
    }
    if (fermionic) {
      FermionState f;
      f.n_modes = st.n_sites();
      f.amps = st.amps;
      return std::make_shared<CachedPurity>(std::make_shared<FermionPurityBackend>(std::move(f)));
    }
    return std::make_shared<CachedPurity>(std::make_shared<DensePurityBackend>(std::move(st)));
  };

  if (source.rfind("mps:", 0) == 0)
    return std::make_shared<CachedPurity>(
        std::make_shared<MpsPurityBackend>(load_complex_tt(source.substr(4))));
  if (source.rfind("dense:", 0) == 0) return make_dense(source.substr(6));
  if (source == "haar-analytic") {
    if (L_hint < 2) throw std::runtime_error("haar-analytic oracle needs --L");
    return std::make_shared<CachedPurity>(std::make_shared<HaarAnalyticBackend>(L_hint, d_hint, false));
  }
  // Fall back on the file extension.
  if (source.size() > 3 && source.substr(source.size() - 3) == ".tt")
    return std::make_shared<CachedPurity>(std::make_shared<MpsPurityBackend>(load_complex_tt(source)));
  return make_dense(source);
}

// --- ef learn ---------------------------------------------------------------

int cmd_ef_learn(const std::string& state, const std::string& oracle, int L, int d,
                 const std::string& basis, int mode, double tol, int chi_max,
                 std::optional<double> eps_th, std::uint64_t seed, const std::string& out) {
  std::shared_ptr<CachedPurity> backend =
      state.empty() ? load_backend(oracle, L, d) : load_backend(state, L, d);

  TciOptions opts;
  opts.tolerance = tol;
  opts.seed = derive_seed(seed, "tci");
  if (chi_max > 0) opts.max_rank = chi_max;
  const TciMode tci_mode = (mode == 1) ? TciMode::kFixedRank : TciMode::kAdaptive;
  if (mode == 1 && chi_max <= 0) throw std::runtime_error("mode 1 requires --chi-max");

  json meta;
  meta["source"] = state.empty() ? oracle : state;
  EFRecord rec = learn_ef(backend, basis, opts, tci_mode, eps_th, meta);

  const fs::path out_path(out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  save_tt(rec.tt, out);
  write_text(out + ".meta.json", rec.sidecar().dump(1) + "\n");

  json flags;
  flags["state"] = state;
  flags["oracle"] = oracle;
  flags["L"] = L;
  flags["d"] = d;
  flags["basis"] = basis;
  flags["mode"] = mode;
  flags["tol"] = tol;
  flags["chi-max"] = chi_max;
  if (eps_th) flags["eps-th"] = *eps_th;
  flags["seed"] = seed;
  flags["out"] = out;
  write_resolved_config(out_path, "ef learn", flags);

  std::cout << "learned basis=" << basis << " L=" << rec.L << " max_chi=" << rec.tt.max_rank()
            << " queries=" << rec.n_queries << " converged=" << (rec.converged ? "yes" : "no")
            << "\n";
  return 0;
}

// --- ef purity ---------------------------------------------------------------

int cmd_ef_purity(const std::string& state, const std::string& mask, bool von_neumann) {
  Partition p = Partition::from_string(mask);
  double value = 0;
  if (von_neumann) {
    DenseState st = load_dense_state(state);
    value = purity_dense(st, p, EntropyKind::kVonNeumann);
  } else {
    auto backend = load_backend(state, 0, 2);
    if (backend->n_sites() != p.L) throw std::runtime_error("mask length does not match the state");
    value = (*backend)(p);
  }
  std::cout << fmt17(value) << "\n";
  return 0;
}

// --- ef scan ------------------------------------------------------------------

ModelSpec scan_family_spec(const std::string& name) {
  ModelSpec spec;
  spec.target = "mid_spectrum";
  if (name == "haar" || name == "product" || name == "haar_analytic" || name == "fredkin") {
    spec.family = name;
    spec.target = "ground";
  } else if (name == "random_mps") {
    spec.family = name;
    spec.params["phi"] = 3;
    spec.target = "ground";
  } else if (name == "motzkin") {
    spec.family = name;
    spec.params["colors"] = 1;
    spec.target = "ground";
  } else if (name == "chaotic") {
    spec.family = "tfim";
    spec.params = {{"J", -1.0}, {"g", -1.05}, {"h", 0.5}, {"W", 0.0}};
  } else if (name == "weak_disorder") {
    spec.family = "tfim";
    spec.params = {{"J", 0.632}, {"g", 0.902}, {"h", 0.0}, {"W", 1.0}};
  } else if (name == "mblt") {
    spec.family = "tfim";
    spec.params = {{"J", 0.632}, {"g", 0.902}, {"h", 0.0}, {"W", 2.5}};
  } else if (name == "mbl") {
    spec.family = "tfim";
    spec.params = {{"J", 0.632}, {"g", 0.902}, {"h", 0.0}, {"W", 5.0}};
  } else if (name == "critical") {
    spec.family = "tfim";
    spec.params = {{"J", -1.0}, {"g", -1.0}, {"h", 0.0}, {"W", 0.0}};
    spec.target = "ground";
  } else if (name == "gue_h") {
    spec.family = "gue_h";
    spec.target = "ground";
  } else if (name == "syk") {
    spec.family = "syk";
    spec.target = "ground";
  } else {
    throw std::runtime_error("unknown scan family: " + name);
  }
  return spec;
}

std::string scan_rows_csv(const std::vector<ScanRow>& rows) {
  std::string text = "family,L,state_seed,run_seed,eps_th,mean_chi,std_chi,mean_queries,status\n";
  for (const auto& r : rows) {
    text += r.family + "," + std::to_string(r.L) + "," + std::to_string(r.state_seed) + "," +
            std::to_string(r.run_seed) + "," + fmt17(r.eps_th) + "," + fmt17(r.mean_chi) + "," +
            fmt17(r.std_chi) + "," + fmt17(r.mean_queries) + "," + r.status + "\n";
  }
  return text;
}

int cmd_ef_scan(const std::string& families, int L_min, int L_max, int L_step,
                const std::string& eps_exp, int n_states, int n_runs, const std::string& basis,
                double tol, std::uint64_t seed, int threads, const std::string& format,
                const std::string& out) {
  ScanGrid grid;
  for (const auto& f : split_csv_list(families)) grid.families.push_back(scan_family_spec(f));
  for (int L = L_min; L <= L_max; L += L_step) grid.Ls.push_back(L);
  for (const auto& e : split_csv_list(eps_exp)) grid.eps_list.push_back(std::pow(1.1, -std::stod(e)));
  grid.n_state_samples = n_states;
  grid.n_tci_runs = n_runs;
  grid.basis = basis;
  grid.base_opts.tolerance = tol;
  grid.root_seed = seed;
  grid.threads = threads;

  std::vector<ScanDetailRun> details;
  std::vector<ScanRow> rows = bond_scan(grid, &details);

  const fs::path out_path(out);
  if (format == "json") {
    json j = json::array();
    for (const auto& r : rows)
      j.push_back({{"family", r.family},
                   {"L", r.L},
                   {"state_seed", r.state_seed},
                   {"run_seed", r.run_seed},
                   {"eps_th", r.eps_th},
                   {"mean_chi", r.mean_chi},
                   {"std_chi", r.std_chi},
                   {"mean_queries", r.mean_queries},
                   {"status", r.status}});
    write_text(out_path, j.dump(1) + "\n");
  } else {
    write_text(out_path, scan_rows_csv(rows));
  }
  {
    json jd = json::array();
    for (const auto& d : details)
      jd.push_back({{"run_seed", d.run_seed},
                    {"eps_th", d.eps_th},
                    {"avg_chi", d.avg_chi},
                    {"max_chi", d.max_chi},
                    {"n_queries", d.n_queries},
                    {"stop_sweep", d.stop_sweep},
                    {"eps", d.eps}});
    write_text(out_path.string() + ".detail.json", jd.dump(1) + "\n");
  }

  json flags;
  flags["families"] = families;
  flags["L-min"] = L_min;
  flags["L-max"] = L_max;
  flags["L-step"] = L_step;
  flags["eps-exp"] = eps_exp;
  flags["n-states"] = n_states;
  flags["n-runs"] = n_runs;
  flags["basis"] = basis;
  flags["tol"] = tol;
  flags["seed"] = seed;
  flags["threads"] = threads;
  flags["format"] = format;
  flags["out"] = out;
  write_resolved_config(out_path, "ef scan", flags);

  int failures = 0;
  for (const auto& r : rows)
    if (r.status != "ok") {
      ++failures;
      std::cerr << "row failed: " << r.family << " L=" << r.L << " seed=" << r.state_seed << ": "
                << r.status << "\n";
    }
  return failures == 0 ? 0 : 1;
}

// --- ef distmatrix -------------------------------------------------------------

int cmd_ef_distmatrix(const std::string& records_arg, const std::string& names_arg,
                      const std::string& out) {
  const auto paths = split_csv_list(records_arg);
  auto names = split_csv_list(names_arg);
  if (paths.empty()) throw std::runtime_error("distmatrix: no records given");
  if (names.empty()) {
    for (const auto& p : paths) names.push_back(fs::path(p).stem().string());
  }
  if (names.size() != paths.size()) throw std::runtime_error("distmatrix: names/records count mismatch");

  std::vector<EFRecord> records;
  for (const auto& p : paths) {
    EFRecord rec;
    rec.tt = load_tt(p);
    json meta = load_json_file(p + ".meta.json");
    rec.basis = meta.at("basis").get<std::string>();
    rec.L = meta.at("L").get<int>();
    records.push_back(std::move(rec));
  }
  Eigen::MatrixXd d = distance_matrix(records);

  // Long-form upper triangle over distinct names; repeated names are
  // resamples and get mean/std over their cross pairs.
  std::vector<std::string> uniq;
  for (const auto& n : names)
    if (std::find(uniq.begin(), uniq.end(), n) == uniq.end()) uniq.push_back(n);
  std::string text = "name_a,name_b,mean,std\n";
  for (size_t a = 0; a < uniq.size(); ++a)
    for (size_t b = a; b < uniq.size(); ++b) {
      std::vector<double> vals;
      for (size_t i = 0; i < names.size(); ++i)
        for (size_t j = 0; j < names.size(); ++j) {
          if (names[i] != uniq[a] || names[j] != uniq[b]) continue;
          if (a == b && i >= j) continue;
          vals.push_back(d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
      if (vals.empty()) continue;
      double mean = 0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double var = 0;
      for (double v : vals) var += (v - mean) * (v - mean);
      const double sd = vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1)) : 0.0;
      text += uniq[a] + "," + uniq[b] + "," + fmt17(mean) + "," + fmt17(sd) + "\n";
    }
  write_text(out, text);

  json flags;
  flags["records"] = records_arg;
  flags["names"] = names_arg;
  flags["out"] = out;
  write_resolved_config(fs::path(out), "ef distmatrix", flags);
  return 0;
}

// --- ef map ---------------------------------------------------------------------

int cmd_ef_map(const std::string& distances, const std::vector<std::string>& pins,
               const std::string& auto_pin, int iters, std::uint64_t seed, const std::string& out) {
  std::ifstream in(distances);
  if (!in) throw std::runtime_error("cannot open " + distances);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::string> names;
  std::map<std::pair<int, int>, double> entries;
  auto name_id = [&](const std::string& n) {
    auto it = std::find(names.begin(), names.end(), n);
    if (it != names.end()) return static_cast<int>(it - names.begin());
    names.push_back(n);
    return static_cast<int>(names.size() - 1);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = split_csv_list(line);
    if (cols.size() < 3) throw std::runtime_error("bad distances row: " + line);
    const int a = name_id(cols[0]);
    const int b = name_id(cols[1]);
    entries[{a, b}] = std::stod(cols[2]);
    entries[{b, a}] = std::stod(cols[2]);
  }
  const int n = static_cast<int>(names.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [key, v] : entries) d(key.first, key.second) = key.first == key.second ? 0.0 : v;

  std::map<int, std::array<double, 2>> pinned;
  for (const auto& pin : pins) {
    const auto eq = pin.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--pin expects name=x,y");
    const std::string name = pin.substr(0, eq);
    const auto coords = split_csv_list(pin.substr(eq + 1));
    if (coords.size() != 2) throw std::runtime_error("--pin expects name=x,y");
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::runtime_error("pinned name not in distances: " + name);
    pinned[static_cast<int>(it - names.begin())] = {std::stod(coords[0]), std::stod(coords[1])};
  }
  if (!auto_pin.empty()) {
    // First lay out only the listed states, then freeze them for a full pass.
    std::vector<int> ids;
    for (const auto& nm : split_csv_list(auto_pin)) {
      const auto it = std::find(names.begin(), names.end(), nm);
      if (it == names.end()) throw std::runtime_error("auto-pin name not in distances: " + nm);
      ids.push_back(static_cast<int>(it - names.begin()));
    }
    Eigen::MatrixXd sub(ids.size(), ids.size());
    for (size_t a = 0; a < ids.size(); ++a)
      for (size_t b = 0; b < ids.size(); ++b) sub(a, b) = d(ids[a], ids[b]);
    StressResult first = stress_layout(sub, {}, iters, derive_seed(seed, "layout-pins"));
    for (size_t a = 0; a < ids.size(); ++a) pinned[ids[a]] = first.coords[a];
  }

  StressResult res = stress_layout(d, pinned, iters, seed);
  std::string text = "name,x,y,pinned\n";
  for (int i = 0; i < n; ++i)
    text += names[static_cast<size_t>(i)] + "," + fmt17(res.coords[static_cast<size_t>(i)][0]) + "," +
            fmt17(res.coords[static_cast<size_t>(i)][1]) + "," + (pinned.count(i) ? "1" : "0") + "\n";
  write_text(out, text);

  json flags;
  flags["distances"] = distances;
  flags["pin"] = pins;
  flags["auto-pin"] = auto_pin;
  flags["iters"] = iters;
  flags["seed"] = seed;
  flags["out"] = out;
  flags["final_stress"] = res.stress;
  write_resolved_config(fs::path(out), "ef map", flags);
  return 0;
}

// --- ef disentangle ---------------------------------------------------------------

int cmd_ef_disentangle(const std::string& oracle, int rank_cap, std::uint64_t seed,
                       const std::string& benchmark_Ls, int phi, int n_samples,
                       const std::string& out) {
  json flags;
  flags["oracle"] = oracle;
  flags["rank-cap"] = rank_cap;
  flags["seed"] = seed;
  flags["out"] = out;

  if (!benchmark_Ls.empty()) {
    std::vector<int> Ls;
    for (const auto& s : split_csv_list(benchmark_Ls)) Ls.push_back(std::stoi(s));
    ShuffleBenchResult res = shuffle_benchmark(phi, Ls, n_samples, seed, rank_cap);
    std::string text = "L,s2_before_mean,s2_after_mean,mean_queries\n";
    for (const auto& r : res.rows)
      text += std::to_string(r.L) + "," + fmt17(r.s2_before_mean) + "," + fmt17(r.s2_after_mean) +
              "," + std::to_string(r.mean_queries) + "\n";
    write_text(out, text);
    flags["benchmark-Ls"] = benchmark_Ls;
    flags["phi"] = phi;
    flags["n-samples"] = n_samples;
    flags["slope_before"] = res.slope_before;
    flags["slope_after"] = res.slope_after;
    write_resolved_config(fs::path(out), "ef disentangle", flags);
    std::cout << "slope before " << res.slope_before << " after " << res.slope_after << "\n";
    return 0;
  }

  auto backend = load_backend(oracle, 0, 2);
  DisentangleReport rep = disentangle(backend, rank_cap, derive_seed(seed, "tci"));
  json j;
  j["L"] = rep.L;
  j["perm"] = rep.ordering.perm;
  j["s2_before"] = rep.s2_before;
  j["s2_after"] = rep.s2_after;
  j["n_queries"] = rep.n_queries;
  write_text(out, j.dump(1) + "\n");
  write_resolved_config(fs::path(out), "ef disentangle", flags);
  std::cout << "mid-cut S2 " << rep.s2_before[static_cast<size_t>(rep.L / 2 - 1)] << " -> "
            << rep.s2_after[static_cast<size_t>(rep.L / 2 - 1)] << " with " << rep.n_queries
            << " queries\n";
  return 0;
}

// --- ef spectrum --------------------------------------------------------------------

int cmd_ef_spectrum(const std::string& phis_arg, int L, int n_samples, std::uint64_t seed,
                    const std::string& out) {
  std::vector<int> phis;
  for (const auto& s : split_csv_list(phis_arg)) phis.push_back(std::stoi(s));
  auto rows = ef_spectrum_study(phis, L, n_samples, seed);
  std::string text = "phi,index,lambda\n";
  for (const auto& r : rows)
    for (size_t i = 0; i < r.lambdas.size(); ++i)
      text += std::to_string(r.phi) + "," + std::to_string(i + 1) + "," + fmt17(r.lambdas[i]) + "\n";
  write_text(out, text);

  json flags;
  flags["phi"] = phis_arg;
  flags["L"] = L;
  flags["n-samples"] = n_samples;
  flags["seed"] = seed;
  flags["out"] = out;
  write_resolved_config(fs::path(out), "ef spectrum", flags);
  for (const auto& r : rows)
    std::cout << "phi=" << r.phi << " lambda3^2/lambda2^2=" << r.ratio32 << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-train purity interpolation toolkit"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (EFTCI_THREADS overrides)");

  // state gen
  auto* state = app.add_subcommand("state", "state generation");
  auto* gen = state->add_subcommand("gen", "generate a benchmark state");
  std::string g_family = "haar", g_target = "ground", g_out = "state.bin";
  int g_L = 8;
  std::uint64_t g_seed = 0;
  double g_J = -1.0, g_g = -1.05, g_h = 0.5, g_W = 0.0, g_phi = 3, g_colors = 1;
  gen->add_option("--family", g_family,
                  "haar|random_mps|tfim|gue_h|syk|motzkin|fredkin|product");
  gen->add_option("--L", g_L, "sites (Dirac modes for syk)");
  gen->add_option("--seed", g_seed, "state seed");
  gen->add_option("--target", g_target, "ground|mid_spectrum");
  gen->add_option("--J", g_J, "Ising coupling");
  gen->add_option("--g", g_g, "transverse field");
  gen->add_option("--h", g_h, "longitudinal field");
  gen->add_option("--W", g_W, "disorder strength");
  gen->add_option("--phi", g_phi, "MPS bond dimension");
  gen->add_option("--colors", g_colors, "Motzkin colors");
  gen->add_option("--out", g_out, "output state file");

  // ef group
  auto* ef = app.add_subcommand("ef", "entanglement-feature operations");

  auto* learn = ef->add_subcommand("learn", "learn a feature by cross interpolation");
  std::string l_state, l_oracle = "haar-analytic", l_basis = "dual", l_out = "ef.tt";
  int l_L = 0, l_d = 2, l_mode = 2, l_chimax = 0;
  double l_tol = 1e-12, l_epsth = -1;
  std::uint64_t l_seed = 0;
  learn->add_option("--state", l_state, "state file (.bin dense, .tt mps)");
  learn->add_option("--oracle", l_oracle, "oracle source when no state file is given");
  learn->add_option("--L", l_L, "sites for analytic oracles");
  learn->add_option("--d", l_d, "local dimension for analytic oracles");
  learn->add_option("--basis", l_basis, "natural|dual");
  learn->add_option("--mode", l_mode, "1 fixed rank, 2 adaptive");
  learn->add_option("--tol", l_tol, "local tolerance");
  learn->add_option("--chi-max", l_chimax, "rank cap (required for mode 1)");
  learn->add_option("--eps-th", l_epsth, "early-stop threshold on the full-enumeration error");
  learn->add_option("--seed", l_seed, "run seed");
  learn->add_option("--out", l_out, "output feature file");

  auto* purity = ef->add_subcommand("purity", "query one purity");
  std::string p_state, p_mask;
  bool p_vn = false;
  purity->add_option("--state", p_state, "state file")->required();
  purity->add_option("--mask", p_mask, "mask string like 0110")->required();
  purity->add_flag("--von-neumann", p_vn, "use the von Neumann variant (dense states)");

  auto* scan = ef->add_subcommand("scan", "bond-dimension scan over families and sizes");
  std::string s_families = "haar", s_epsexp = "40,60", s_basis = "dual", s_format = "csv",
              s_out = "scan.csv";
  int s_Lmin = 6, s_Lmax = 10, s_Lstep = 2, s_nstates = 10, s_nruns = 10;
  double s_tol = 1e-12;
  std::uint64_t s_seed = 0;
  scan->add_option("--families", s_families, "comma list; see docs for names");
  scan->add_option("--L-min", s_Lmin);
  scan->add_option("--L-max", s_Lmax);
  scan->add_option("--L-step", s_Lstep);
  scan->add_option("--eps-exp", s_epsexp, "thresholds 1.1^-k, comma list of k");
  scan->add_option("--n-states", s_nstates, "state samples per point");
  scan->add_option("--n-runs", s_nruns, "TCI runs per state");
  scan->add_option("--basis", s_basis, "natural|dual");
  scan->add_option("--tol", s_tol, "TCI local tolerance");
  scan->add_option("--seed", s_seed, "root seed");
  scan->add_option("--format", s_format, "csv|json");
  scan->add_option("--out", s_out, "output table");

  auto* dist = ef->add_subcommand("distmatrix", "pairwise feature distances");
  std::string dm_records, dm_names, dm_out = "dist.csv";
  dist->add_option("--records", dm_records, "comma list of learned .tt files")->required();
  dist->add_option("--names", dm_names, "comma list of labels (repeats = resamples)");
  dist->add_option("--out", dm_out, "output CSV");

  auto* map_cmd = ef->add_subcommand("map", "stress-majorization layout of a distance table");
  std::string m_dist, m_autopin, m_out = "map.csv";
  std::vector<std::string> m_pins;
  int m_iters = 512;
  std::uint64_t m_seed = 0;
  map_cmd->add_option("--distances", m_dist, "distances CSV (name_a,name_b,mean,std)")->required();
  map_cmd->add_option("--pin", m_pins, "fixed coordinate name=x,y (repeatable)");
  map_cmd->add_option("--auto-pin", m_autopin, "lay these out first, then freeze them");
  map_cmd->add_option("--iters", m_iters, "majorization iterations");
  map_cmd->add_option("--seed", m_seed, "layout seed");
  map_cmd->add_option("--out", m_out, "output CSV");

  auto* dis = ef->add_subcommand("disentangle", "search a low-entanglement site ordering");
  std::string de_oracle, de_bench, de_out = "report.json";
  int de_rank = 2, de_phi = 3, de_nsamples = 3;
  std::uint64_t de_seed = 0;
  dis->add_option("--oracle", de_oracle, "purity oracle, e.g. mps:state.tt or dense:state.bin");
  dis->add_option("--rank-cap", de_rank, "search rank");
  dis->add_option("--seed", de_seed, "run seed");
  dis->add_option("--benchmark-Ls", de_bench, "run the shuffled-MPS benchmark over these L");
  dis->add_option("--phi", de_phi, "benchmark MPS bond dimension");
  dis->add_option("--n-samples", de_nsamples, "benchmark samples per L");
  dis->add_option("--out", de_out, "report file");

  auto* spec_cmd = ef->add_subcommand("spectrum", "half-cut spectra of direct MPS features");
  std::string sp_phis = "2,3,4", sp_out = "spectrum.csv";
  int sp_L = 15, sp_nsamples = 10;
  std::uint64_t sp_seed = 0;
  spec_cmd->add_option("--phi", sp_phis, "comma list of bond dimensions");
  spec_cmd->add_option("--L", sp_L, "sites");
  spec_cmd->add_option("--n-samples", sp_nsamples, "samples per bond dimension");
  spec_cmd->add_option("--seed", sp_seed, "root seed");
  spec_cmd->add_option("--out", sp_out, "output CSV");

  CLI11_PARSE(app, argc, argv);
  threads = resolve_threads(threads);

  try {
    if (gen->parsed())
      return cmd_state_gen(g_family, g_L, g_seed, g_target,
                           {{"J", g_J},
                            {"g", g_g},
                            {"h", g_h},
                            {"W", g_W},
                            {"phi", g_phi},
                            {"colors", g_colors}},
                           g_out);
    if (learn->parsed())
      return cmd_ef_learn(l_state, l_oracle, l_L, l_d, l_basis, l_mode, l_tol, l_chimax,
                          l_epsth >= 0 ? std::optional<double>(l_epsth) : std::nullopt, l_seed,
                          l_out);
    if (purity->parsed()) return cmd_ef_purity(p_state, p_mask, p_vn);
    if (scan->parsed())
      return cmd_ef_scan(s_families, s_Lmin, s_Lmax, s_Lstep, s_epsexp, s_nstates, s_nruns, s_basis,
                         s_tol, s_seed, threads, s_format, s_out);
    if (dist->parsed()) return cmd_ef_distmatrix(dm_records, dm_names, dm_out);
    if (map_cmd->parsed()) return cmd_ef_map(m_dist, m_pins, m_autopin, m_iters, m_seed, m_out);
    if (dis->parsed())
      return cmd_ef_disentangle(de_oracle, de_rank, de_seed, de_bench, de_phi, de_nsamples, de_out);
    if (spec_cmd->parsed()) return cmd_ef_spectrum(sp_phis, sp_L, sp_nsamples, sp_seed, sp_out);
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
