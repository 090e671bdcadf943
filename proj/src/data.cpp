#include "setatom/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace setatom {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
  const std::string cell = trim(raw);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) {
    throw std::runtime_error("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                             ", column " + std::to_string(col + 1));
  }
  return v;
}

}  // namespace

Dataset Dataset::subset(const std::vector<Eigen::Index>& idx) const {
  Dataset out;
  out.signals.resize(signals.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t t = 0; t < idx.size(); ++t) out.signals.col(static_cast<Eigen::Index>(t)) = signals.col(idx[t]);
  if (labels) {
    std::vector<int> l;
    l.reserve(idx.size());
    for (auto i : idx) l.push_back((*labels)[static_cast<std::size_t>(i)]);
    out.labels = std::move(l);
  }
  out.feature_names = feature_names;
  return out;
}

void Dataset::validate() const {
  if (!signals.allFinite()) throw std::invalid_argument("dataset: non-finite entries");
  if (labels) {
    if (static_cast<Eigen::Index>(labels->size()) != signals.cols())
      throw std::invalid_argument("dataset: label count != sample count");
    for (int v : *labels)
      if (v != 0 && v != 1) throw std::invalid_argument("dataset: labels must be 0 or 1");
  }
}

Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file: " + path);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  std::optional<std::size_t> label_idx;
  if (label_column) {
    auto it = std::find(header.begin(), header.end(), *label_column);
    if (it == header.end()) throw std::runtime_error("label column '" + *label_column + "' not found");
    label_idx = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                               " cells, header has " + std::to_string(header.size()));
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c], row_no, c);
      if (label_idx && c == *label_idx) {
        if (v != 0.0 && v != 1.0)
          throw std::runtime_error("label value outside {0,1} at row " + std::to_string(row_no));
        labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
    rows.push_back(std::move(values));
  }

  Dataset d;
  const auto m = static_cast<Eigen::Index>(header.size() - (label_idx ? 1 : 0));
  d.signals.resize(m, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (Eigen::Index i = 0; i < m; ++i) d.signals(i, static_cast<Eigen::Index>(r)) = rows[r][static_cast<std::size_t>(i)];
  for (std::size_t c = 0; c < header.size(); ++c)
    if (!label_idx || c != *label_idx) d.feature_names.push_back(header[c]);
  if (label_idx) d.labels = std::move(labels);
  d.validate();
  return d;
}

void save_csv(const Dataset& d, const std::string& path, const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < d.dim(); ++i) {
    if (i > 0) out << ',';
    out << (static_cast<std::size_t>(i) < d.feature_names.size() ? d.feature_names[static_cast<std::size_t>(i)]
                                                                  : "f" + std::to_string(i + 1));
  }
  if (d.labels) out << ',' << label_column;
  out << '\n';
  for (Eigen::Index l = 0; l < d.size(); ++l) {
    for (Eigen::Index i = 0; i < d.dim(); ++i) {
      if (i > 0) out << ',';
      out << d.signals(i, l);
    }
    if (d.labels) out << ',' << (*d.labels)[static_cast<std::size_t>(l)];
    out << '\n';
  }
}

Split split_train_test(const Dataset& d, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split: train_fraction must be in (0, 1)");
  const Eigen::Index N = d.size();
  const auto n_train = static_cast<Eigen::Index>(std::floor(train_fraction * static_cast<double>(N)));
  if (N < 2 || n_train < 1 || n_train >= N)
    throw std::invalid_argument("split: too few samples for a non-empty train and test side");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Split s;
  s.train_index.assign(order.begin(), order.begin() + n_train);
  s.test_index.assign(order.begin() + n_train, order.end());
  std::sort(s.train_index.begin(), s.train_index.end());
  std::sort(s.test_index.begin(), s.test_index.end());
  s.train = d.subset(s.train_index);
  s.test = d.subset(s.test_index);
  return s;
}

StandardizeStats fit_standardize(const Dataset& train) {
  if (train.size() < 1) throw std::invalid_argument("standardize: empty training set");
  StandardizeStats st;
  st.mean = train.signals.rowwise().mean();
  const Eigen::MatrixXd centered = train.signals.colwise() - st.mean;
  st.stddev = (centered.array().square().rowwise().sum() / static_cast<double>(train.size())).sqrt();
  st.stddev = st.stddev.cwiseMax(kStddevFloor);
  return st;
}

Dataset apply_standardize(const Dataset& d, const StandardizeStats& stats) {
  if (stats.mean.size() != d.dim()) throw std::invalid_argument("standardize: feature count mismatch");
  Dataset out = d;
  out.signals = ((d.signals.colwise() - stats.mean).array().colwise() / stats.stddev.array()).matrix();
  return out;
}

Standardized standardize(const Dataset& train, const Dataset& test) {
  Standardized s;
  s.stats = fit_standardize(train);
  s.train = apply_standardize(train, s.stats);
  s.test = apply_standardize(test, s.stats);
  return s;
}

Dataset synth_dependency(int m, int n_normal, int n_anomaly, std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("synth_dependency: m must be >= 2");
  if (n_normal < 0 || n_anomaly < 0) throw std::invalid_argument("synth_dependency: negative count");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const int rank = std::max(1, m / 4);
  constexpr double kNoise = 0.5;
  Eigen::MatrixXd loading(m, rank);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < rank; ++k) loading(i, k) = normal(rng);

  const int N = n_normal + n_anomaly;
  Dataset d;
  d.signals.resize(m, N);
  for (int l = 0; l < N; ++l) {
    Eigen::VectorXd z(rank);
    for (int k = 0; k < rank; ++k) z[k] = normal(rng);
    Eigen::VectorXd noise(m);
    for (int i = 0; i < m; ++i) noise[i] = kNoise * normal(rng);
    d.signals.col(l) = loading * z + noise;
  }
  if (n_anomaly > 1) {
    std::vector<int> order(static_cast<std::size_t>(n_anomaly));
    for (int i = 0; i < m; ++i) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      Eigen::RowVectorXd row = d.signals.row(i).segment(n_normal, n_anomaly);
      for (int t = 0; t < n_anomaly; ++t) d.signals(i, n_normal + t) = row[order[static_cast<std::size_t>(t)]];
    }
  }
  std::vector<int> labels(static_cast<std::size_t>(N), 0);
  std::fill(labels.begin() + n_normal, labels.end(), 1);
  d.labels = std::move(labels);
  for (int i = 0; i < m; ++i) d.feature_names.push_back("f" + std::to_string(i + 1));
  return d;
}

double mean_abs_correlation(const Eigen::MatrixXd& signals) {
  const Eigen::Index m = signals.rows();
  if (m < 2 || signals.cols() < 2) return 0.0;
  const Eigen::MatrixXd c = signals.colwise() - signals.rowwise().mean();
  const Eigen::MatrixXd cov = c * c.transpose();
  double total = 0.0;
  int pairs = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double denom = std::sqrt(cov(i, i) * cov(j, j));
      total += denom > 0.0 ? std::abs(cov(i, j)) / denom : 0.0;
      ++pairs;
    }
  }
  return total / pairs;
}

}  // namespace setatom
