#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <Eigen/Dense>

namespace raspkit {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);

nlohmann::json mat_to_json(const Mat& m);
Mat mat_from_json(const nlohmann::json& j);

/// CSV with minimal quoting (fields containing commas/quotes are quoted).
void write_csv(const std::string& path, const std::vector<std::vector<std::string>>& rows);
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace raspkit
