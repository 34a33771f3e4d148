// checkpoint.cc

// Copyright 2026  spkdino authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "checkpoint.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "text.h"

namespace spkdino {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'K', 'D', 'I', 'N', 'O', '\0'};

template <typename T>
void PutLe(std::string* out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutString(std::string* out, const std::string& s) {
  PutLe<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out->append(s);
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T Le() {
    Need(sizeof(T));
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  std::string String() {
    uint32_t n = Le<uint32_t>();
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  double F64() {
    uint64_t bits = Le<uint64_t>();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  void Raw(char* dst, size_t n) {
    Need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  void Need(size_t n) const {
    if (bytes_.size() - pos_ < n) Fail(ErrorCode::kFormat, "checkpoint truncated at byte ", pos_);
  }
  const std::string& bytes_;
  size_t pos_ = 0;
};

std::string LayoutOf(const ModelParams& p) {
  std::string s;
  for (size_t i = 0; i < p.encoder.size(); ++i)
    s += (i ? "," : "") + std::to_string(p.encoder[i].kernel) + ":" +
         std::to_string(p.encoder[i].dilation);
  return s;
}

struct Entry {
  std::string name;
  const Matrix* data;
};

void Collect(const std::string& prefix, const ModelParams& p, std::vector<Entry>* out) {
  p.ForEach([&](const std::string& name, const Matrix& m) { out->push_back({prefix + name, &m}); });
}

int ParseIndex(const std::string& s, const std::string& name) {
  int64_t v = ParseInt(s, name);
  if (v < 0 || v > 1000) Fail(ErrorCode::kFormat, "bad layer index in tensor ", name);
  return static_cast<int>(v);
}

void Expect(bool ok, const char* what) {
  if (!ok) Fail(ErrorCode::kFormat, "checkpoint tensor shapes disagree at ", what);
}

void CheckShapes(const ModelParams& p) {
  Eigen::Index in = p.encoder[0].weight.rows() / p.encoder[0].kernel;
  for (const auto& l : p.encoder) {
    Expect(l.weight.rows() == l.kernel * in && l.bias.rows() == 1 &&
               l.bias.cols() == l.weight.cols(), "encoder");
    in = l.weight.cols();
  }
  auto linear = [&](const Linear& l, const char* what) {
    Expect(l.weight.cols() == in && l.bias.rows() == l.weight.rows() && l.bias.cols() == 1, what);
    in = l.weight.rows();
  };
  in *= 2;
  linear(p.embed, "embed");
  Eigen::Index embed = in;
  if (p.has_head()) {
    for (const auto& h : p.hidden) linear(h, "head.hidden");
    linear(p.bottleneck, "head.bottleneck");
    Expect(p.prototypes.cols() == in, "head.prototypes");
  }
  if (p.has_aam()) Expect(p.aam.cols() == embed, "aam.prototypes");
}

// Rebuilds one parameter group from its tensors.
ModelParams Assemble(const std::map<std::string, Matrix>& tensors,
                     const std::vector<TdnnSpec>& layout) {
  ModelParams p;
  p.encoder.resize(layout.size());
  for (size_t i = 0; i < layout.size(); ++i) {
    p.encoder[i].kernel = layout[i].kernel;
    p.encoder[i].dilation = layout[i].dilation;
  }
  for (const auto& [name, m] : tensors) {
    auto parts = Split(name, '.');
    if (parts[0] == "encoder" && parts.size() == 3) {
      size_t i = static_cast<size_t>(ParseIndex(parts[1], name));
      if (i >= p.encoder.size()) Fail(ErrorCode::kFormat, "tensor ", name, " beyond layout");
      (parts[2] == "weight" ? p.encoder[i].weight : p.encoder[i].bias) = m;
    } else if (parts[0] == "embed" && parts.size() == 2) {
      (parts[1] == "weight" ? p.embed.weight : p.embed.bias) = m;
    } else if (parts[0] == "head" && parts.size() == 4 && parts[1] == "hidden") {
      size_t i = static_cast<size_t>(ParseIndex(parts[2], name));
      if (p.hidden.size() <= i) p.hidden.resize(i + 1);
      (parts[3] == "weight" ? p.hidden[i].weight : p.hidden[i].bias) = m;
    } else if (parts[0] == "head" && parts.size() == 3 && parts[1] == "bottleneck") {
      (parts[2] == "weight" ? p.bottleneck.weight : p.bottleneck.bias) = m;
    } else if (name == "head.prototypes") {
      p.prototypes = m;
    } else if (name == "aam.prototypes") {
      p.aam = m;
    } else {
      Fail(ErrorCode::kFormat, "unknown tensor ", name);
    }
  }
  size_t expected = 0;
  p.ForEach([&](const std::string& name, const Matrix& m) {
    ++expected;
    if (m.size() == 0) Fail(ErrorCode::kFormat, "missing tensor ", name);
  });
  if (expected != tensors.size()) Fail(ErrorCode::kFormat, "inconsistent tensor set");
  CheckShapes(p);
  return p;
}

std::vector<TdnnSpec> ParseLayout(const std::string& s) {
  std::vector<TdnnSpec> out;
  for (const auto& f : Split(s, ',')) {
    auto kd = Split(f, ':');
    if (kd.size() != 2) Fail(ErrorCode::kFormat, "bad layer layout '", s, "'");
    out.push_back({static_cast<int>(ParseInt(kd[0], "kernel")),
                   static_cast<int>(ParseInt(kd[1], "dilation"))});
  }
  return out;
}

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& ckpt) {
  std::vector<Entry> entries;
  Collect("student.", ckpt.student, &entries);
  if (ckpt.teacher) Collect("teacher.", *ckpt.teacher, &entries);
  if (ckpt.velocity) Collect("velocity.", *ckpt.velocity, &entries);
  Matrix center;
  if (ckpt.center) {
    center = ckpt.center->transpose();
    entries.push_back({"center", &center});
  }

  std::string out(kMagic, sizeof(kMagic));
  PutLe<uint32_t>(&out, kCheckpointVersion);
  PutLe<uint64_t>(&out, static_cast<uint64_t>(ckpt.step));
  PutString(&out, LayoutOf(ckpt.student));
  PutString(&out, ckpt.config_text);
  PutLe<uint32_t>(&out, static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) {
    PutString(&out, e.name);
    PutLe<uint64_t>(&out, static_cast<uint64_t>(e.data->rows()));
    PutLe<uint64_t>(&out, static_cast<uint64_t>(e.data->cols()));
  }
  for (const auto& e : entries) {
    for (Eigen::Index i = 0; i < e.data->size(); ++i) {
      uint64_t bits;
      double v = e.data->data()[i];
      std::memcpy(&bits, &v, sizeof(bits));
      PutLe<uint64_t>(&out, bits);
    }
  }
  return out;
}

Checkpoint DeserializeCheckpoint(const std::string& bytes) {
  Reader r(bytes);
  char magic[8];
  r.Raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    Fail(ErrorCode::kFormat, "not a spkdino checkpoint");
  uint32_t version = r.Le<uint32_t>();
  if (version != kCheckpointVersion)
    Fail(ErrorCode::kFormat, "unsupported checkpoint version ", version);
  Checkpoint ckpt;
  ckpt.step = static_cast<int64_t>(r.Le<uint64_t>());
  std::vector<TdnnSpec> layout = ParseLayout(r.String());
  ckpt.config_text = r.String();

  uint32_t n = r.Le<uint32_t>();
  std::vector<std::pair<std::string, Matrix>> tensors;
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = r.String();
    uint64_t rows = r.Le<uint64_t>(), cols = r.Le<uint64_t>();
    if (rows > (1u << 24) || cols > (1u << 24) || rows * cols > (1u << 26))
      Fail(ErrorCode::kFormat, "tensor ", name, " has implausible shape ", rows, "x", cols);
    tensors.emplace_back(std::move(name), Matrix(rows, cols));
  }
  std::map<std::string, std::map<std::string, Matrix>> groups;
  for (auto& [name, m] : tensors) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.F64();
    if (name == "center") {
      if (m.rows() != 1) Fail(ErrorCode::kFormat, "center must be a row vector");
      ckpt.center = Vector(m.transpose());
      continue;
    }
    size_t dot = name.find('.');
    if (dot == std::string::npos) Fail(ErrorCode::kFormat, "tensor ", name, " lacks a group");
    groups[name.substr(0, dot)][name.substr(dot + 1)] = std::move(m);
  }
  if (!r.AtEnd()) Fail(ErrorCode::kFormat, "trailing bytes after checkpoint data");

  for (const auto& [group, members] : groups) {
    ModelParams p = Assemble(members, layout);
    if (group == "student") ckpt.student = std::move(p);
    else if (group == "teacher") ckpt.teacher = std::move(p);
    else if (group == "velocity") ckpt.velocity = std::move(p);
    else Fail(ErrorCode::kFormat, "unknown tensor group ", group);
  }
  if (ckpt.student.encoder.empty() || ckpt.student.embed.weight.size() == 0)
    Fail(ErrorCode::kFormat, "checkpoint has no student model");
  DimsOf(ckpt.student).Validate();
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path) {
  std::string bytes = SerializeCheckpoint(ckpt);
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIo, "cannot write ", tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(ErrorCode::kIo, "write failed for ", tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot move checkpoint into ", path, ": ", ec.message());
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open checkpoint ", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return DeserializeCheckpoint(ss.str());
}

}  // namespace spkdino
