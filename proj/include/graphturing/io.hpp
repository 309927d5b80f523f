#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "graphturing/continuation.hpp"

namespace graphturing {

/// Fixed %.15g formatting, so reruns are byte-identical.
std::string format_number(double x);

/// N,index,eigenvalue,normalized with 1-based index in descending order.
void write_eigenvalues_csv(const std::filesystem::path& path, int n, const Eigen::VectorXd& eigenvalues);

/// step,epsilon,amplitude,supnorm,stable
void write_branch_csv(const std::filesystem::path& path, const Branch& branch);

/// j,x,u on the grid x_j = j/N.
void write_profile_csv(const std::filesystem::path& path, const Eigen::VectorXd& u);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

nlohmann::ordered_json events_to_json(const Branch& branch);

}  // namespace graphturing
