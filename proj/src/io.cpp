#include "graphturing/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace graphturing {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

}  // namespace

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

void write_eigenvalues_csv(const std::filesystem::path& path, int n, const Eigen::VectorXd& eigenvalues) {
  auto out = open_out(path);
  out << "N,index,eigenvalue,normalized\n";
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    out << n << ',' << (k + 1) << ',' << format_number(eigenvalues(k)) << ','
        << format_number(eigenvalues(k) / n) << '\n';
  }
}

void write_branch_csv(const std::filesystem::path& path, const Branch& branch) {
  auto out = open_out(path);
  out << "step,epsilon,amplitude,supnorm,stable\n";
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    const auto& s = branch.points[i];
    out << i << ',' << format_number(s.epsilon) << ',' << format_number(s.amplitude) << ','
        << format_number(s.supnorm) << ',' << (s.stable ? 1 : 0) << '\n';
  }
}

void write_profile_csv(const std::filesystem::path& path, const Eigen::VectorXd& u) {
  auto out = open_out(path);
  out << "j,x,u\n";
  const auto n = u.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    out << (j + 1) << ',' << format_number(static_cast<double>(j + 1) / static_cast<double>(n)) << ','
        << format_number(u(j)) << '\n';
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

nlohmann::ordered_json events_to_json(const Branch& branch) {
  auto list = nlohmann::ordered_json::array();
  for (const auto& e : branch.events) {
    nlohmann::ordered_json j;
    j["kind"] = e.kind == EventKind::Fold ? "fold" : "branch_point";
    j["epsilon"] = e.epsilon;
    j["amplitude"] = e.amplitude;
    j["index"] = e.index;
    list.push_back(j);
  }
  return list;
}

}  // namespace graphturing
