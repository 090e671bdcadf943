#include "setatom/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace setatom {

nlohmann::json dictionary_to_json(const Dictionary<double>& dict) {
  nlohmann::json j;
  j["m"] = dict.dim();
  j["n"] = dict.size();
  std::vector<double> atoms(dict.atoms.data(), dict.atoms.data() + dict.atoms.size());
  j["atoms"] = atoms;
  j["radii"] = std::vector<double>(dict.radii.data(), dict.radii.data() + dict.radii.size());
  j["perm"] = dict.perm;
  return j;
}

Dictionary<double> dictionary_from_json(const nlohmann::json& j) {
  const auto m = j.at("m").get<Index>();
  const auto n = j.at("n").get<Index>();
  const auto atoms = j.at("atoms").get<std::vector<double>>();
  const auto radii = j.at("radii").get<std::vector<double>>();
  if (static_cast<Index>(atoms.size()) != m * n) throw std::invalid_argument("dictionary json: atoms size != m*n");
  if (static_cast<Index>(radii.size()) != n) throw std::invalid_argument("dictionary json: radii size != n");
  Dictionary<double> dict(Eigen::Map<const Eigen::MatrixXd>(atoms.data(), m, n));
  dict.radii = Eigen::Map<const Eigen::VectorXd>(radii.data(), n);
  dict.perm = j.at("perm").get<std::vector<Index>>();
  validate(dict, 1e-9);
  return dict;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << contents;
    if (!out) throw std::runtime_error("write failed: " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot move " + tmp + " to " + path + ": " + ec.message());
}

void save_dictionary(const Dictionary<double>& dict, const std::string& path) {
  write_file_atomic(path, dictionary_to_json(dict).dump(2) + "\n");
}

Dictionary<double> load_dictionary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dictionary file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.contains("dictionary")) return dictionary_from_json(j.at("dictionary"));
  return dictionary_from_json(j);
}

std::map<std::string, std::map<std::string, double>> load_competitor_aucs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open competitor CSV: " + path);
  std::map<std::string, std::map<std::string, double>> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header) {
      header = false;
      if (cells.size() != 3 || cells[0] != "dataset" || cells[1] != "method" || cells[2] != "auc")
        throw std::runtime_error("competitor CSV header must be dataset,method,auc");
      continue;
    }
    if (cells.size() != 3) throw std::runtime_error("competitor CSV: expected 3 cells: " + line);
    std::size_t used = 0;
    const double auc = std::stod(cells[2], &used);
    if (used != cells[2].size()) throw std::runtime_error("competitor CSV: non-numeric auc: " + cells[2]);
    out[cells[0]][cells[1]] = auc;
  }
  return out;
}

}  // namespace setatom
