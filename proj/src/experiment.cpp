#include "setatom/experiment.hpp"

#include "setatom/baseline.hpp"
#include "setatom/detail/parallel.hpp"
#include "setatom/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

namespace setatom {

namespace {

struct AlgorithmName {
  Algorithm algorithm;
  const char* name;
};

constexpr AlgorithmName kAlgorithms[] = {
    {Algorithm::aksvd_omp, "aksvd_omp"},         {Algorithm::gauss_l1, "gauss_l1"},
    {Algorithm::dl_gauss_l1, "dl_gauss_l1"},     {Algorithm::dlg_l1_adapt_0, "dlg_l1_adapt_0"},
    {Algorithm::dlg_l1_adapt_1, "dlg_l1_adapt_1"}, {Algorithm::cone_dl, "cone_dl"},
    {Algorithm::cone_dl_d, "cone_dl_d"},         {Algorithm::dlc_adapt_0, "dlc_adapt_0"},
    {Algorithm::dlc_adapt_1, "dlc_adapt_1"},     {Algorithm::dlc_d_adapt_0, "dlc_d_adapt_0"},
    {Algorithm::dlc_d_adapt_1, "dlc_d_adapt_1"},
};

std::string format_number(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string short_number(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

UseNorm use_norm_of(Algorithm a) {
  switch (a) {
    case Algorithm::dlg_l1_adapt_0:
    case Algorithm::dlc_adapt_0:
    case Algorithm::dlc_d_adapt_0: return UseNorm::zero;
    default: return UseNorm::one;
  }
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

std::string to_string(Algorithm a) {
  for (const auto& e : kAlgorithms)
    if (e.algorithm == a) return e.name;
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (const auto& e : kAlgorithms)
    if (name == e.name) return e.algorithm;
  throw std::invalid_argument("unknown algorithm: " + name);
}

bool is_gaussian(Algorithm a) {
  return a == Algorithm::gauss_l1 || a == Algorithm::dl_gauss_l1 || a == Algorithm::dlg_l1_adapt_0 ||
         a == Algorithm::dlg_l1_adapt_1;
}

bool is_cone(Algorithm a) { return !is_gaussian(a) && a != Algorithm::aksvd_omp; }

bool is_adaptive(Algorithm a) {
  return a == Algorithm::dlg_l1_adapt_0 || a == Algorithm::dlg_l1_adapt_1 || a == Algorithm::dlc_adapt_0 ||
         a == Algorithm::dlc_adapt_1 || a == Algorithm::dlc_d_adapt_0 || a == Algorithm::dlc_d_adapt_1;
}

Algorithm non_adaptive_counterpart(Algorithm a) {
  switch (a) {
    case Algorithm::dlg_l1_adapt_0:
    case Algorithm::dlg_l1_adapt_1: return Algorithm::dl_gauss_l1;
    case Algorithm::dlc_adapt_0:
    case Algorithm::dlc_adapt_1: return Algorithm::cone_dl;
    case Algorithm::dlc_d_adapt_0:
    case Algorithm::dlc_d_adapt_1: return Algorithm::cone_dl_d;
    default: return a;
  }
}

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw std::invalid_argument("config: dataset is required");
  if (!(overcompleteness > 0.0)) throw std::invalid_argument("config: overcompleteness must be positive");
  RadiiSpec{rho_min, rho_max, distribution}.validate(is_cone(algorithm));
  if (runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  if (n_it < 1) throw std::invalid_argument("config: n_it must be >= 1");
  if (nu < 1) throw std::invalid_argument("config: nu must be >= 1");
  if (aksvd_iters < 1) throw std::invalid_argument("config: aksvd_iters must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("config: train_fraction must be in (0, 1)");
  if ((is_cone(algorithm) || algorithm == Algorithm::aksvd_omp) && s < 1)
    throw std::invalid_argument("config: s >= 1 required for cone and OMP algorithms");
  if (is_gaussian(algorithm)) gauss_params(*this).validate();
  if (is_cone(algorithm)) cone_params(*this).validate();
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["dataset"] = c.dataset;
  j["dataset_name"] = c.dataset_name;
  j["label_column"] = c.label_column;
  j["algorithm"] = to_string(c.algorithm);
  j["overcompleteness"] = c.overcompleteness;
  j["rho_min"] = c.rho_min;
  j["rho_max"] = c.rho_max;
  j["distribution"] = to_string(c.distribution);
  j["s"] = c.s;
  j["lambda"] = c.lambda;
  j["gamma"] = c.gamma;
  j["n_it"] = c.n_it;
  j["nu"] = c.nu;
  j["delta0"] = c.delta0;
  j["rotation_mode"] = c.rotation_mode == RotationMode::symmetric ? "symmetric" : "radius_weighted";
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["train_fraction"] = c.train_fraction;
  j["aksvd_iters"] = c.aksvd_iters;
  j["inner_iters"] = c.inner_iters;
  j["tol"] = c.tol;
  j["support_cap"] = c.support_cap;
  j["max_separation_passes"] = c.max_separation_passes;
  j["competitors"] = c.competitors;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "dataset") c.dataset = v.get<std::string>();
    else if (key == "dataset_name") c.dataset_name = v.get<std::string>();
    else if (key == "label_column") c.label_column = v.get<std::string>();
    else if (key == "algorithm") c.algorithm = parse_algorithm(v.get<std::string>());
    else if (key == "overcompleteness") c.overcompleteness = v.get<double>();
    else if (key == "rho_min") c.rho_min = v.get<double>();
    else if (key == "rho_max") c.rho_max = v.get<double>();
    else if (key == "distribution") c.distribution = parse_distribution(v.get<std::string>());
    else if (key == "s") c.s = v.get<int>();
    else if (key == "lambda") c.lambda = v.get<double>();
    else if (key == "gamma") c.gamma = v.get<double>();
    else if (key == "n_it") c.n_it = v.get<int>();
    else if (key == "nu") c.nu = v.get<int>();
    else if (key == "delta0") c.delta0 = v.get<double>();
    else if (key == "rotation_mode") {
      const auto mode = v.get<std::string>();
      if (mode == "symmetric") c.rotation_mode = RotationMode::symmetric;
      else if (mode == "radius_weighted") c.rotation_mode = RotationMode::radius_weighted;
      else throw std::invalid_argument("config: unknown rotation_mode " + mode);
    } else if (key == "runs") c.runs = v.get<int>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "train_fraction") c.train_fraction = v.get<double>();
    else if (key == "aksvd_iters") c.aksvd_iters = v.get<int>();
    else if (key == "inner_iters") c.inner_iters = v.get<int>();
    else if (key == "tol") c.tol = v.get<double>();
    else if (key == "support_cap") c.support_cap = v.get<int>();
    else if (key == "max_separation_passes") c.max_separation_passes = v.get<int>();
    else if (key == "competitors") c.competitors = v.get<std::string>();
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return c;
}

void apply_override(ExperimentConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override must be key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  // Keep string-typed keys as strings even when the text looks numeric.
  const nlohmann::json current = config_to_json(c);
  if (current.contains(key) && current.at(key).is_string() && !value.is_string()) value = raw;
  c = config_from_json(nlohmann::json{{key, value}}, c);
}

std::optional<SyntheticSpec> parse_synthetic(const std::string& dataset) {
  static const std::regex pattern(R"(\s*synthetic\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*)");
  std::smatch match;
  if (!std::regex_match(dataset, match, pattern)) return std::nullopt;
  return SyntheticSpec{std::stoi(match[1]), std::stoi(match[2]), std::stoi(match[3])};
}

Dataset load_dataset(const ExperimentConfig& c, std::uint64_t seed) {
  if (auto syn = parse_synthetic(c.dataset)) return synth_dependency(syn->m, syn->n_normal, syn->n_anomaly, seed);
  return load_csv(c.dataset, c.label_column.empty() ? std::nullopt : std::optional<std::string>(c.label_column));
}

GaussParams gauss_params(const ExperimentConfig& c) {
  return GaussParams{c.lambda, c.gamma, c.inner_iters, c.tol, c.support_cap};
}

ConeParams cone_params(const ExperimentConfig& c) {
  return ConeParams{c.s, c.delta0, c.rotation_mode, c.max_separation_passes};
}

Index atom_count(const ExperimentConfig& c, Index m) {
  return std::max<Index>(2, static_cast<Index>(std::lround(c.overcompleteness * static_cast<double>(m))));
}

TrainedModel train_model(const ExperimentConfig& c, const Eigen::MatrixXd& Y, std::uint64_t seed) {
  c.validate();
  const Index m = Y.rows();
  const Index n = atom_count(c, m);
  const Eigen::VectorXd rho_bar = make_radii<double>(RadiiSpec{c.rho_min, c.rho_max, c.distribution}, n);
  const std::uint64_t init_seed = detail::mix_seed(seed, 3);
  const std::uint64_t radii_seed = detail::mix_seed(seed, 4);
  const std::uint64_t separation_seed = detail::mix_seed(seed, 5);
  const int cone_s = static_cast<int>(std::min<Index>(c.s, std::min(m, n)));
  const int gauss_s = static_cast<int>(std::min<Index>(c.support_cap, std::min(m, n)));

  TrainedModel model;
  TrainStats stats;
  auto with_random_radii = [&](Dictionary<double> d) {
    auto a = shuffle_radii(rho_bar, radii_seed);
    d.radii = a.radii;
    d.perm = a.perm;
    return d;
  };
  auto aksvd_init = [&](int s) { return aksvd_train(Y, n, s, c.aksvd_iters, init_seed); };

  ConeParams cp = cone_params(c);
  cp.s = cone_s;
  const GaussParams gp = gauss_params(c);

  switch (c.algorithm) {
    case Algorithm::aksvd_omp:
      model.dict = aksvd_train(Y, n, cone_s, c.n_it, init_seed, &stats.train_error);
      model.scoring = OmpScoring{cone_s};
      break;
    case Algorithm::gauss_l1:
      model.dict = with_random_radii(aksvd_init(gauss_s));
      model.scoring = gp;
      break;
    case Algorithm::dl_gauss_l1:
      model.dict = dl_gauss_l1(Y, with_random_radii(aksvd_init(gauss_s)), gp, c.n_it, &stats);
      model.scoring = gp;
      break;
    case Algorithm::dlg_l1_adapt_0:
    case Algorithm::dlg_l1_adapt_1:
      model.dict = dl_g_l1_adapt(Y, aksvd_init(gauss_s), rho_bar, gp, c.n_it, c.nu, use_norm_of(c.algorithm), &stats);
      model.scoring = gp;
      break;
    case Algorithm::cone_dl:
    case Algorithm::cone_dl_d: {
      auto d0 = c.algorithm == Algorithm::cone_dl ? init_dictionary(Y, n, InitMethod::random_gaussian, init_seed)
                                                  : aksvd_init(cone_s);
      model.dict = cone_dl(Y, with_random_radii(std::move(d0)), cp, c.n_it, &stats);
      model.scoring = cp;
      break;
    }
    case Algorithm::dlc_adapt_0:
    case Algorithm::dlc_adapt_1:
    case Algorithm::dlc_d_adapt_0:
    case Algorithm::dlc_d_adapt_1: {
      const bool from_aksvd = c.algorithm == Algorithm::dlc_d_adapt_0 || c.algorithm == Algorithm::dlc_d_adapt_1;
      auto d0 = from_aksvd ? aksvd_init(cone_s) : init_dictionary(Y, n, InitMethod::random_gaussian, init_seed);
      model.dict = dlc_adapt(Y, std::move(d0), rho_bar, cp, c.n_it, c.nu, use_norm_of(c.algorithm), separation_seed,
                             &stats);
      model.scoring = cp;
      break;
    }
  }
  model.non_convergence_flags = stats.decorrelation_failures;
  model.train_error = std::move(stats.train_error);
  return model;
}

nlohmann::json result_to_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["config"] = config_to_json(r.config);
  j["algorithm"] = to_string(r.config.algorithm);
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& rec : r.runs) {
    runs.push_back({{"seed", rec.seed},
                    {"roc_auc", rec.roc_auc},
                    {"mean_per_element_error", rec.mean_per_element_error},
                    {"wall_time_seconds", rec.wall_time_seconds},
                    {"non_convergence_flags", rec.non_convergence_flags}});
  }
  j["runs"] = runs;
  j["aggregate"] = {{"mean_roc_auc", r.mean_auc},
                    {"std_roc_auc", r.std_auc},
                    {"mean_per_element_error", r.mean_error},
                    {"std_per_element_error", r.std_error}};
  if (r.rank) j["aggregate"]["rank"] = *r.rank;
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult result;
  result.config = c;
  const bool synthetic = parse_synthetic(c.dataset).has_value();
  std::optional<Dataset> file_data;
  if (!synthetic) file_data = load_dataset(c, 0);

  std::vector<double> aucs;
  std::vector<double> errors;
  for (int r = 1; r <= c.runs; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t run_seed = c.seed + static_cast<std::uint64_t>(r);
    const Dataset data = synthetic ? load_dataset(c, detail::mix_seed(run_seed, 1)) : *file_data;
    if (!data.has_labels()) throw std::invalid_argument("run_experiment: dataset has no labels");
    const Split split = split_train_test(data, c.train_fraction, detail::mix_seed(run_seed, 2));
    const Standardized z = standardize(split.train, split.test);

    const TrainedModel model = train_model(c, z.train.signals, run_seed);
    const ScoredTestSet scored = score_test_set(z.test, model.dict, model.scoring);

    RunRecord rec;
    rec.seed = run_seed;
    rec.roc_auc = roc_auc(scored);
    double total = 0.0;
    for (double s : scored.scores) total += s;
    rec.mean_per_element_error = scored.scores.empty() ? 0.0 : total / static_cast<double>(scored.scores.size());
    rec.non_convergence_flags = model.non_convergence_flags;
    rec.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    aucs.push_back(rec.roc_auc);
    errors.push_back(rec.mean_per_element_error);
    result.runs.push_back(rec);
  }
  std::tie(result.mean_auc, result.std_auc) = mean_std(aucs);
  std::tie(result.mean_error, result.std_error) = mean_std(errors);

  if (!c.competitors.empty()) {
    const auto table = load_competitor_aucs(c.competitors);
    const auto it = table.find(c.name_for_lookup());
    if (it != table.end()) {
      std::vector<double> theirs;
      for (const auto& [method, auc] : it->second) theirs.push_back(auc);
      result.rank = rank_against(result.mean_auc, theirs);
    }
  }
  return result;
}

std::vector<ExperimentConfig> expand_grid(const nlohmann::json& grid) {
  std::vector<ExperimentConfig> out;
  if (grid.is_array()) {
    for (const auto& item : grid) out.push_back(config_from_json(item));
    return out;
  }
  if (!grid.is_object()) throw std::invalid_argument("grid: expected an array or object");
  for (const auto& [key, v] : grid.items()) {
    (void)v;
    if (key != "base" && key != "axes" && key != "configs")
      throw std::invalid_argument("grid: unknown key '" + key + "'");
  }
  const ExperimentConfig base = grid.contains("base") ? config_from_json(grid.at("base")) : ExperimentConfig{};

  std::vector<nlohmann::json> overrides{nlohmann::json::object()};
  if (grid.contains("configs")) {
    overrides.clear();
    for (const auto& item : grid.at("configs")) overrides.push_back(item);
  }
  std::vector<nlohmann::json> combos{nlohmann::json::object()};
  if (grid.contains("axes")) {
    for (const auto& [key, values] : grid.at("axes").items()) {
      if (!values.is_array()) throw std::invalid_argument("grid: axis '" + key + "' must be a list");
      std::vector<nlohmann::json> next;
      for (const auto& partial : combos) {
        for (const auto& v : values) {
          nlohmann::json extended = partial;
          extended[key] = v;
          next.push_back(std::move(extended));
        }
      }
      combos = std::move(next);
    }
  }
  for (const auto& o : overrides)
    for (const auto& combo : combos) out.push_back(config_from_json(combo, config_from_json(o, base)));
  return out;
}

std::string summary_table_csv(const std::vector<ExperimentResult>& results) {
  using RowKey = std::pair<std::string, double>;
  using ColKey = std::tuple<std::string, double, double>;
  std::vector<RowKey> rows;
  std::vector<ColKey> cols;
  std::map<std::pair<RowKey, ColKey>, std::vector<double>> cells;
  for (const auto& r : results) {
    const RowKey rk{to_string(r.config.algorithm), r.config.overcompleteness};
    const ColKey ck{to_string(r.config.distribution), r.config.rho_min, r.config.rho_max};
    if (std::find(rows.begin(), rows.end(), rk) == rows.end()) rows.push_back(rk);
    if (std::find(cols.begin(), cols.end(), ck) == cols.end()) cols.push_back(ck);
    cells[{rk, ck}].push_back(r.mean_auc);
  }
  std::ostringstream out;
  out << "algorithm,n_over_m";
  for (const auto& [dist, lo, hi] : cols) out << ',' << dist << '@' << short_number(lo) << '-' << short_number(hi);
  out << '\n';
  for (const auto& rk : rows) {
    out << rk.first << ',' << short_number(rk.second);
    for (const auto& ck : cols) {
      out << ',';
      const auto it = cells.find({rk, ck});
      if (it == cells.end()) continue;
      double mean = 0.0;
      for (double v : it->second) mean += v;
      out << format_number(mean / static_cast<double>(it->second.size()));
    }
    out << '\n';
  }
  return out.str();
}

std::string improvements_csv(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  bool any = false;
  for (const auto& adaptive : results) {
    if (!is_adaptive(adaptive.config.algorithm)) continue;
    const Algorithm want = non_adaptive_counterpart(adaptive.config.algorithm);
    for (const auto& base : results) {
      const auto& a = adaptive.config;
      const auto& b = base.config;
      if (b.algorithm != want || b.name_for_lookup() != a.name_for_lookup() ||
          b.overcompleteness != a.overcompleteness || b.rho_min != a.rho_min || b.rho_max != a.rho_max ||
          b.distribution != a.distribution)
        continue;
      if (!any) {
        out << "dataset,algorithm,baseline,n_over_m,distribution,rho_min,rho_max,auc_adaptive,auc_baseline,"
               "difference,improvement_ratio,degenerate\n";
        any = true;
      }
      const auto ratio = improvement_ratio(adaptive.mean_auc, base.mean_auc);
      out << a.name_for_lookup() << ',' << to_string(a.algorithm) << ',' << to_string(b.algorithm) << ','
          << short_number(a.overcompleteness) << ',' << to_string(a.distribution) << ',' << short_number(a.rho_min)
          << ',' << short_number(a.rho_max) << ',' << format_number(adaptive.mean_auc) << ','
          << format_number(base.mean_auc) << ',' << format_number(adaptive.mean_auc - base.mean_auc) << ','
          << format_number(ratio.value) << ',' << (ratio.degenerate ? 1 : 0) << '\n';
      break;
    }
  }
  return out.str();
}

SweepSummary run_sweep(const std::vector<ExperimentConfig>& grid, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw std::runtime_error("sweep: cannot create output directory " + out_dir);
  {
    // Probe writability before spending time on experiments.
    const std::string probe = (fs::path(out_dir) / ".write_probe").string();
    write_file_atomic(probe, "");
    fs::remove(probe, ec);
  }

  SweepSummary summary;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ExperimentResult r = run_experiment(grid[i]);
    std::ostringstream name;
    name << "result_" << std::setw(3) << std::setfill('0') << i << ".json";
    write_file_atomic((fs::path(out_dir) / name.str()).string(), result_to_json(r).dump(2) + "\n");
    summary.results.push_back(std::move(r));
  }
  summary.table_csv = summary_table_csv(summary.results);
  write_file_atomic((fs::path(out_dir) / "summary.csv").string(), summary.table_csv);
  const std::string improvements = improvements_csv(summary.results);
  if (!improvements.empty()) write_file_atomic((fs::path(out_dir) / "improvements.csv").string(), improvements);
  return summary;
}

}  // namespace setatom
