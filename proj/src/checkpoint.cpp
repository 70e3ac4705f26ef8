// Copyright 2026 The LOGAN Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "logan/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "logan/errors.hpp"

namespace logan {

namespace {

using nlohmann::json;

class Writer {
 public:
  void raw(const std::string& s) { out_ += s; }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void real(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void text(const std::string& s) {
    uint(static_cast<std::uint32_t>(s.size()));
    raw(s);
  }
  void arrays(const std::vector<Tensor>& ts) {
    uint(static_cast<std::uint32_t>(ts.size()));
    for (const auto& t : ts) {
      uint(static_cast<std::uint32_t>(t.rank()));
      for (auto d : t.shape()) uint(static_cast<std::uint64_t>(d));
      uint(static_cast<std::uint64_t>(t.numel()));
      for (double v : t.data()) real(v);
    }
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Parser {
 public:
  explicit Parser(const std::string& in) : in_(in) {}
  std::string raw(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  double real() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string text() { return raw(uint<std::uint32_t>()); }
  std::vector<Tensor> arrays() {
    const auto count = uint<std::uint32_t>();
    std::vector<Tensor> out;
    for (std::uint32_t i = 0; i < count; ++i) {
      const auto rank = uint<std::uint32_t>();
      if (rank > 8) throw CheckpointError("corrupt checkpoint: tensor rank " + std::to_string(rank));
      Shape shape;
      for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(static_cast<std::size_t>(uint<std::uint64_t>()));
      const auto n = uint<std::uint64_t>();
      if (n != shape_numel(shape)) throw CheckpointError("corrupt checkpoint: length does not match shape");
      if (n > remaining() / 8) throw CheckpointError("truncated checkpoint");
      std::vector<double> v(static_cast<std::size_t>(n));
      for (auto& x : v) x = real();
      out.emplace_back(shape, std::move(v));
    }
    return out;
  }
  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) throw CheckpointError("truncated checkpoint");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

json spec_json(const MlpSpec& s) {
  return {{"widths", s.widths},
          {"slope", s.slope},
          {"bias", s.bias},
          {"final_bias", s.final_bias},
          {"activation", s.activation == Activation::kTanh ? "tanh" : "leaky_relu"}};
}

MlpSpec spec_from(const json& j) {
  MlpSpec s;
  s.widths = j.at("widths").get<std::vector<std::size_t>>();
  s.slope = j.at("slope").get<double>();
  s.bias = j.at("bias").get<bool>();
  s.final_bias = j.at("final_bias").get<bool>();
  s.activation = j.at("activation").get<std::string>() == "tanh" ? Activation::kTanh : Activation::kLeakyRelu;
  return s;
}

}  // namespace

std::string encode_checkpoint(const TrainState& state) {
  Writer w;
  w.raw("LOGN");
  w.uint(kCheckpointVersion);
  const json desc = {{"generator", spec_json(state.model.generator_spec())},
                     {"discriminator", spec_json(state.model.discriminator_spec())}};
  w.text(desc.dump());
  w.arrays(state.model.theta_g());
  w.arrays(state.model.theta_d());
  w.uint(static_cast<std::uint64_t>(state.optimiser.t));
  w.arrays(state.optimiser.v_g);
  w.arrays(state.optimiser.v_d);
  w.text(state.rng.state());
  w.uint(static_cast<std::uint64_t>(state.step));
  return w.take();
}

TrainState decode_checkpoint(const std::string& bytes) {
  Parser p(bytes);
  if (bytes.size() < 4 || p.raw(4) != "LOGN") throw CheckpointError("not a checkpoint (bad magic)");
  const auto version = p.uint<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  MlpSpec gen, disc;
  try {
    const json desc = json::parse(p.text());
    gen = spec_from(desc.at("generator"));
    disc = spec_from(desc.at("discriminator"));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupt architecture descriptor: ") + e.what());
  }
  TrainState s;
  auto tg = p.arrays();
  auto td = p.arrays();
  try {
    s.model = GanModel::from_parameters(gen, disc, std::move(tg), std::move(td));
  } catch (const Error& e) {
    throw CheckpointError(std::string("checkpoint parameters do not match the descriptor: ") + e.what());
  }
  s.optimiser.t = p.uint<std::uint64_t>();
  s.optimiser.v_g = p.arrays();
  s.optimiser.v_d = p.arrays();
  try {
    s.rng.set_state(p.text());
  } catch (const Error&) {
    throw CheckpointError("corrupt RNG state in checkpoint");
  }
  s.step = p.uint<std::uint64_t>();
  if (!p.done()) throw CheckpointError("trailing bytes after checkpoint");
  return s;
}

void save_checkpoint(const std::string& path, const TrainState& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  const std::string bytes = encode_checkpoint(state);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

TrainState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace logan
