#ifndef SETATOM_IO_HPP
#define SETATOM_IO_HPP

#include "setatom/types.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace setatom {

/// {m, n, atoms (column-major), radii, perm}; perm entries are 0-based.
nlohmann::json dictionary_to_json(const Dictionary<double>& dict);
/// Inverse of dictionary_to_json; validates the Dictionary invariants.
Dictionary<double> dictionary_from_json(const nlohmann::json& j);

void save_dictionary(const Dictionary<double>& dict, const std::string& path);
Dictionary<double> load_dictionary(const std::string& path);

/// Competitor AUCs keyed by dataset name, read from a (dataset, method, auc) CSV.
std::map<std::string, std::map<std::string, double>> load_competitor_aucs(const std::string& path);

/// Writes `contents` via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace setatom

#endif  // SETATOM_IO_HPP
