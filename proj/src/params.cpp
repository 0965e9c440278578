#include "docner/params.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include <nlohmann/json.hpp>

#include "docner/error.hpp"

namespace docner {

Var ParamRegistry::add(const std::string& name, Mat init) {
  if (index_.count(name)) {
    throw DataError("parameter registered twice: " + name);
  }
  Var v = leaf(std::move(init));
  index_[name] = order_.size();
  order_.push_back({name, v});
  return v;
}

Var ParamRegistry::add_glorot(const std::string& name, Eigen::Index rows,
                              Eigen::Index cols, RngStream& rng) {
  return add(name, glorot_matrix(rows, cols, rng));
}

Var ParamRegistry::add_zeros(const std::string& name, Eigen::Index rows,
                             Eigen::Index cols) {
  return add(name, Mat::Zero(rows, cols));
}

bool ParamRegistry::has(const std::string& name) const {
  return index_.count(name) > 0;
}

Var ParamRegistry::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw DataError("unknown parameter: " + name);
  }
  return order_[it->second].var;
}

std::size_t ParamRegistry::total_elements() const {
  std::size_t n = 0;
  for (const auto& p : order_) {
    n += static_cast<std::size_t>(p.var.size());
  }
  return n;
}

void ParamRegistry::zero_grad() {
  for (auto& p : order_) {
    p.var.clear_grad();
  }
}

double ParamRegistry::grad_norm() const {
  double sq = 0.0;
  for (const auto& p : order_) {
    if (p.var.grad().size() > 0) {
      sq += p.var.grad().squaredNorm();
    }
  }
  return std::sqrt(sq);
}

std::string ParamRegistry::first_nonfinite_grad() const {
  for (const auto& p : order_) {
    if (p.var.grad().size() > 0 && !p.var.grad().allFinite()) {
      return p.name;
    }
  }
  return "";
}

void ParamRegistry::load_values(const std::map<std::string, Mat>& values) {
  for (auto& p : order_) {
    auto it = values.find(p.name);
    if (it == values.end()) {
      throw DataError("checkpoint missing parameter: " + p.name);
    }
    const Mat& m = it->second;
    if (m.rows() != p.var.rows() || m.cols() != p.var.cols()) {
      throw DataError("checkpoint shape mismatch for " + p.name);
    }
    p.var.value() = m;
  }
}

namespace {

constexpr char kMagic[] = "DOCNER1\n";

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) {
    b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  }
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  }
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamRegistry& params,
                     const nlohmann::json& meta) {
  nlohmann::json header;
  header["meta"] = meta;
  auto manifest = nlohmann::json::array();
  for (const auto& p : params.all()) {
    manifest.push_back({{"name", p.name},
                        {"rows", p.var.rows()},
                        {"cols", p.var.cols()}});
  }
  header["params"] = manifest;
  std::string hs = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw ParseError("cannot write checkpoint: " + path);
  }
  os.write(kMagic, sizeof(kMagic) - 1);
  write_u64(os, hs.size());
  os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& p : params.all()) {
    const Mat& m = p.var.value();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        double v = m(r, c);
        os.write(reinterpret_cast<const char*>(&v), sizeof(double));
      }
    }
  }
  if (!os) {
    throw ParseError("short write saving checkpoint: " + path);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw ParseError("cannot open checkpoint: " + path);
  }
  char magic[sizeof(kMagic) - 1];
  is.read(magic, sizeof(magic));
  if (!is || std::string(magic, sizeof(magic)) != kMagic) {
    throw ParseError("not a checkpoint file: " + path);
  }
  std::uint64_t hlen = read_u64(is);
  std::string hs(hlen, '\0');
  is.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!is) {
    throw ParseError("truncated checkpoint header: " + path);
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad checkpoint header: " + std::string(e.what()));
  }

  Checkpoint ck;
  ck.meta = header.at("meta");
  for (const auto& entry : header.at("params")) {
    std::string name = entry.at("name");
    Eigen::Index rows = entry.at("rows");
    Eigen::Index cols = entry.at("cols");
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        double v = 0;
        is.read(reinterpret_cast<char*>(&v), sizeof(double));
        m(r, c) = v;
      }
    }
    if (!is) {
      throw ParseError("truncated checkpoint payload: " + path);
    }
    ck.values[name] = std::move(m);
  }
  return ck;
}

}  // namespace docner
