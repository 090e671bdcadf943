// setatom: train, score and evaluate set-atom dictionaries for anomaly detection.

#include "setatom/detail/parallel.hpp"
#include "setatom/experiment.hpp"
#include "setatom/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;
using namespace setatom;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig c = path.empty() ? ExperimentConfig{} : config_from_json(read_json(path));
  for (const auto& o : overrides) apply_override(c, o);
  c.validate();
  return c;
}

json scoring_to_json(const ScoringParams& p) {
  return std::visit(
      [](const auto& v) -> json {
        using P = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<P, OmpScoring>) {
          return {{"method", "omp"}, {"s", v.s}};
        } else if constexpr (std::is_same_v<P, GaussParams>) {
          return {{"method", "gauss"}, {"lambda", v.lambda}, {"gamma", v.gamma}, {"inner_iters", v.inner_iters},
                  {"tol", v.tol}, {"support_cap", v.support_cap}};
        } else {
          return {{"method", "cone"}, {"s", v.s}};
        }
      },
      p);
}

ScoringParams scoring_from_json(const json& j) {
  const auto method = j.at("method").get<std::string>();
  if (method == "omp") return OmpScoring{j.at("s").get<int>()};
  if (method == "cone") {
    ConeParams p;
    p.s = j.at("s").get<int>();
    return p;
  }
  if (method == "gauss") {
    return GaussParams{j.at("lambda").get<double>(), j.at("gamma").get<double>(), j.at("inner_iters").get<int>(),
                       j.at("tol").get<double>(), j.at("support_cap").get<int>()};
  }
  throw std::invalid_argument("unknown scoring method: " + method);
}

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides, const std::string& out,
              int run) {
  const ExperimentConfig c = load_config(config_path, overrides);
  const std::uint64_t run_seed = c.seed + static_cast<std::uint64_t>(run);
  const Dataset data = load_dataset(c, detail::mix_seed(run_seed, 1));
  Dataset train = data;
  if (data.has_labels()) train = split_train_test(data, c.train_fraction, detail::mix_seed(run_seed, 2)).train;
  const StandardizeStats stats = fit_standardize(train);
  const Dataset z = apply_standardize(train, stats);
  const TrainedModel model = train_model(c, z.signals, run_seed);

  json j;
  j["algorithm"] = to_string(c.algorithm);
  j["dictionary"] = dictionary_to_json(model.dict);
  j["scoring"] = scoring_to_json(model.scoring);
  j["standardize"] = {{"mean", to_vector(stats.mean)}, {"stddev", to_vector(stats.stddev)}};
  j["config"] = config_to_json(c);
  j["non_convergence_flags"] = model.non_convergence_flags;
  ensure_parent(out);
  write_file_atomic(out, j.dump(2) + "\n");
  std::cout << "trained " << to_string(c.algorithm) << " (m=" << model.dict.dim() << ", n=" << model.dict.size()
            << ") on " << train.size() << " signals -> " << out << "\n";
  return 0;
}

int cmd_score(const std::string& model_path, const std::string& data_path, const std::string& label_column,
              const std::string& out) {
  const json j = read_json(model_path);
  const Dictionary<double> dict = dictionary_from_json(j.at("dictionary"));
  const ScoringParams scoring = scoring_from_json(j.at("scoring"));
  Dataset data = load_csv(data_path, label_column.empty() ? std::nullopt : std::optional<std::string>(label_column));
  if (j.contains("standardize")) {
    StandardizeStats stats;
    const auto mean = j.at("standardize").at("mean").get<std::vector<double>>();
    const auto sd = j.at("standardize").at("stddev").get<std::vector<double>>();
    stats.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    stats.stddev = Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    data = apply_standardize(data, stats);
  }
  const std::vector<double> scores = score_signals(data.signals, dict, scoring);
  std::ostringstream csv;
  csv << std::setprecision(17) << "index,score" << (data.has_labels() ? ",label" : "") << "\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    csv << i << ',' << scores[i];
    if (data.has_labels()) csv << ',' << (*data.labels)[i];
    csv << "\n";
  }
  if (out.empty() || out == "-") std::cout << csv.str();
  else {
    ensure_parent(out);
    write_file_atomic(out, csv.str());
  }
  if (data.has_labels()) {
    std::cerr << "roc_auc " << roc_auc(scores, *data.labels) << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& config_path, const std::vector<std::string>& overrides, const std::string& out_dir) {
  const ExperimentConfig c = load_config(config_path, overrides);
  std::filesystem::create_directories(out_dir);
  const ExperimentResult r = run_experiment(c);
  const std::string path = (std::filesystem::path(out_dir) / "result.json").string();
  write_file_atomic(path, result_to_json(r).dump(2) + "\n");
  std::cout << to_string(c.algorithm) << ": mean ROC AUC " << r.mean_auc << " (sd " << r.std_auc
            << "), mean per-element error " << r.mean_error << " over " << r.runs.size() << " runs";
  if (r.rank) std::cout << ", rank " << *r.rank;
  std::cout << "\n";
  return 0;
}

int cmd_sweep(const std::string& grid_path, const std::vector<std::string>& overrides, const std::string& out_dir) {
  auto grid = expand_grid(read_json(grid_path));
  for (auto& c : grid)
    for (const auto& o : overrides) apply_override(c, o);
  const SweepSummary s = run_sweep(grid, out_dir);
  std::cout << s.table_csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Set-atom dictionary learning for anomaly detection"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::vector<std::string> overrides;
  int run = 1;

  auto* train = app.add_subcommand("train", "Train a dictionary and save it as JSON");
  train->add_option("--config", config_path, "Experiment config JSON");
  train->add_option("--out", out, "Model output path")->required();
  train->add_option("--set", overrides, "Override a config key (key=value), repeatable");
  train->add_option("--run", run, "Run index used to derive the seed (default 1)");

  std::string model_path;
  std::string data_path;
  std::string label_column;
  auto* score = app.add_subcommand("score", "Score a CSV with a trained model");
  score->add_option("--model", model_path, "Model JSON from `train`")->required();
  score->add_option("--data", data_path, "CSV file to score")->required();
  score->add_option("--label-column", label_column, "Label column to exclude from features");
  score->add_option("--out", out, "Scores CSV output (default stdout)");

  auto* eval = app.add_subcommand("eval", "Run a seeded multi-run experiment");
  eval->add_option("--config", config_path, "Experiment config JSON");
  eval->add_option("--out", out, "Output directory")->required();
  eval->add_option("--set", overrides, "Override a config key (key=value), repeatable");

  std::string grid_path;
  auto* sweep = app.add_subcommand("sweep", "Run a grid of experiments");
  sweep->add_option("--grid", grid_path, "Grid JSON")->required();
  sweep->add_option("--out", out, "Output directory")->required();
  sweep->add_option("--set", overrides, "Override a config key in every grid entry, repeatable");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(config_path, overrides, out, run);
    if (*score) return cmd_score(model_path, data_path, label_column, out);
    if (*eval) return cmd_eval(config_path, overrides, out);
    if (*sweep) return cmd_sweep(grid_path, overrides, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
