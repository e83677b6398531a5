#pragma once

#include <complex>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "eftci/tensor_train.hpp"

namespace eftci {

/// Versioned JSON tensor-train format:
///   {"version":1, "dims":[...],
///    "cores":[{"shape":[r0,d,r1], "data":[row-major floats]}, ...]}
/// Complex trains add a "data_im" array of the same length per core.
inline nlohmann::json tt_to_json(const TensorTrain& tt) {
  nlohmann::json j;
  j["version"] = 1;
  j["dims"] = tt.dims();
  nlohmann::json cores = nlohmann::json::array();
  for (int l = 0; l < tt.n_sites(); ++l) {
    const auto& c = tt.core(l);
    nlohmann::json jc;
    jc["shape"] = {c.left, c.dim, c.right};
    jc["data"] = c.data;
    cores.push_back(std::move(jc));
  }
  j["cores"] = std::move(cores);
  return j;
}

inline nlohmann::json tt_to_json(const ComplexTensorTrain& tt) {
  nlohmann::json j;
  j["version"] = 1;
  j["dims"] = tt.dims();
  nlohmann::json cores = nlohmann::json::array();
  for (int l = 0; l < tt.n_sites(); ++l) {
    const auto& c = tt.core(l);
    std::vector<double> re(c.data.size()), im(c.data.size());
    for (size_t i = 0; i < c.data.size(); ++i) {
      re[i] = c.data[i].real();
      im[i] = c.data[i].imag();
    }
    nlohmann::json jc;
    jc["shape"] = {c.left, c.dim, c.right};
    jc["data"] = std::move(re);
    jc["data_im"] = std::move(im);
    cores.push_back(std::move(jc));
  }
  j["cores"] = std::move(cores);
  return j;
}

namespace detail {

inline void check_tt_json(const nlohmann::json& j) {
  if (!j.contains("version") || j["version"].get<int>() != 1)
    throw std::runtime_error("tt json: unsupported version");
  if (!j.contains("dims") || !j.contains("cores")) throw std::runtime_error("tt json: missing fields");
  if (j["dims"].size() != j["cores"].size()) throw std::runtime_error("tt json: dims/cores mismatch");
}

}  // namespace detail

inline bool tt_json_is_complex(const nlohmann::json& j) {
  detail::check_tt_json(j);
  for (const auto& jc : j["cores"])
    if (jc.contains("data_im")) return true;
  return false;
}

inline TensorTrain tt_from_json(const nlohmann::json& j) {
  detail::check_tt_json(j);
  std::vector<int> dims = j["dims"].get<std::vector<int>>();
  std::vector<TTCore<double>> cores;
  for (const auto& jc : j["cores"]) {
    auto shape = jc["shape"].get<std::vector<Eigen::Index>>();
    if (shape.size() != 3) throw std::runtime_error("tt json: core shape must have 3 entries");
    TTCore<double> c(shape[0], shape[1], shape[2]);
    auto data = jc["data"].get<std::vector<double>>();
    if (data.size() != c.data.size()) throw std::runtime_error("tt json: core data length mismatch");
    c.data = std::move(data);
    cores.push_back(std::move(c));
  }
  return TensorTrain(std::move(dims), std::move(cores));
}

inline ComplexTensorTrain complex_tt_from_json(const nlohmann::json& j) {
  detail::check_tt_json(j);
  std::vector<int> dims = j["dims"].get<std::vector<int>>();
  std::vector<TTCore<std::complex<double>>> cores;
  for (const auto& jc : j["cores"]) {
    auto shape = jc["shape"].get<std::vector<Eigen::Index>>();
    if (shape.size() != 3) throw std::runtime_error("tt json: core shape must have 3 entries");
    TTCore<std::complex<double>> c(shape[0], shape[1], shape[2]);
    auto re = jc["data"].get<std::vector<double>>();
    if (re.size() != c.data.size()) throw std::runtime_error("tt json: core data length mismatch");
    std::vector<double> im(re.size(), 0.0);
    if (jc.contains("data_im")) {
      im = jc["data_im"].get<std::vector<double>>();
      if (im.size() != re.size()) throw std::runtime_error("tt json: data_im length mismatch");
    }
    for (size_t i = 0; i < re.size(); ++i) c.data[i] = {re[i], im[i]};
    cores.push_back(std::move(c));
  }
  return ComplexTensorTrain(std::move(dims), std::move(cores));
}

template <class TT>
void save_tt(const TT& tt, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_tt: cannot open " + path);
  out << tt_to_json(tt).dump(1) << "\n";
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

inline TensorTrain load_tt(const std::string& path) { return tt_from_json(load_json_file(path)); }
inline ComplexTensorTrain load_complex_tt(const std::string& path) {
  return complex_tt_from_json(load_json_file(path));
}

}  // namespace eftci
