#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "greenwave/csv.hpp"
#include "greenwave/rng.hpp"

namespace greenwave {

// Output-unit activations. Hidden layers are always tanh.
enum class Act { Linear, Tanh, Tanh01, Logistic };

inline const char* act_name(Act a) {
  switch (a) {
    case Act::Linear: return "linear";
    case Act::Tanh: return "tanh";
    case Act::Tanh01: return "tanh01";
    case Act::Logistic: return "logistic";
  }
  throw std::logic_error("act_name: bad tag");
}

inline Act act_from_name(const std::string& s) {
  if (s == "linear") return Act::Linear;
  if (s == "tanh") return Act::Tanh;
  if (s == "tanh01") return Act::Tanh01;
  if (s == "logistic") return Act::Logistic;
  throw std::runtime_error("act_from_name: unknown activation '" + s + "'");
}

inline double act_eval(Act a, double z) {
  switch (a) {
    case Act::Linear: return z;
    case Act::Tanh: return std::tanh(z);
    case Act::Tanh01: return 0.5 * (std::tanh(z) + 1.0);
    case Act::Logistic: return 1.0 / (1.0 + std::exp(-z));
  }
  throw std::logic_error("act_eval: bad tag");
}

// Derivative expressed through the activation value y = f(z).
inline double act_grad(Act a, double y) {
  switch (a) {
    case Act::Linear: return 1.0;
    case Act::Tanh: return 1.0 - y * y;
    case Act::Tanh01: return 2.0 * y * (1.0 - y);
    case Act::Logistic: return y * (1.0 - y);
  }
  throw std::logic_error("act_grad: bad tag");
}

// Fully connected net: sizes = {in, h1, ..., out}. Weights row-major
// per layer: w[l][j * in_l + i] maps input unit i to output unit j.
struct DenseNet {
  std::vector<std::size_t> sizes;
  std::vector<Act> out_acts;  // one per output unit
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  std::size_t layer_count() const { return sizes.size() - 1; }
  std::size_t input_dim() const { return sizes.front(); }
  std::size_t output_dim() const { return sizes.back(); }
};

inline DenseNet make_net(const std::vector<std::size_t>& sizes,
                         const std::vector<Act>& out_acts, Rng& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("make_net: need input and output layers");
  for (std::size_t s : sizes)
    if (s == 0) throw std::invalid_argument("make_net: zero-width layer");
  if (out_acts.size() != sizes.back())
    throw std::invalid_argument("make_net: one output activation per output unit");
  DenseNet net;
  net.sizes = sizes;
  net.out_acts = out_acts;
  net.w.resize(net.layer_count());
  net.b.resize(net.layer_count());
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::size_t fan_in = sizes[l];
    const std::size_t fan_out = sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    net.w[l].resize(fan_in * fan_out);
    net.b[l].resize(fan_out);
    for (double& v : net.w[l]) v = rng.uniform(-bound, bound);
    for (double& v : net.b[l]) v = rng.uniform(-bound, bound);
  }
  return net;
}

// Activations of every layer, kept for the backward pass.
struct ForwardTrace {
  std::vector<std::vector<double>> acts;  // acts[0] = input, acts[L] = output
  const std::vector<double>& output() const { return acts.back(); }
};

inline ForwardTrace forward(const DenseNet& net, const std::vector<double>& x) {
  if (x.size() != net.input_dim())
    throw std::invalid_argument("forward: input size mismatch");
  ForwardTrace tr;
  tr.acts.resize(net.layer_count() + 1);
  tr.acts[0] = x;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::size_t in_n = net.sizes[l];
    const std::size_t out_n = net.sizes[l + 1];
    const bool last = (l + 1 == net.layer_count());
    std::vector<double>& out = tr.acts[l + 1];
    out.resize(out_n);
    const std::vector<double>& in = tr.acts[l];
    for (std::size_t j = 0; j < out_n; ++j) {
      double z = net.b[l][j];
      const double* wr = net.w[l].data() + j * in_n;
      for (std::size_t i = 0; i < in_n; ++i) z += wr[i] * in[i];
      out[j] = last ? act_eval(net.out_acts[j], z) : std::tanh(z);
    }
  }
  return tr;
}

// Parameter gradients shaped like the net, accumulated across samples.
struct GradientTape {
  std::vector<std::vector<double>> dw;
  std::vector<std::vector<double>> db;
};

inline GradientTape make_tape(const DenseNet& net) {
  GradientTape t;
  t.dw.resize(net.layer_count());
  t.db.resize(net.layer_count());
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    t.dw[l].assign(net.w[l].size(), 0.0);
    t.db[l].assign(net.b[l].size(), 0.0);
  }
  return t;
}

// Backprop of dL/dy through the trace. Adds parameter gradients into the
// tape and returns dL/dx so callers can chain through the input (the actor
// update needs dQ/da).
inline std::vector<double> backward(const DenseNet& net, const ForwardTrace& tr,
                                    const std::vector<double>& dLdy,
                                    GradientTape& tape) {
  if (dLdy.size() != net.output_dim())
    throw std::invalid_argument("backward: output grad size mismatch");
  const std::size_t L = net.layer_count();
  std::vector<double> delta(net.output_dim());
  for (std::size_t j = 0; j < delta.size(); ++j)
    delta[j] = dLdy[j] * act_grad(net.out_acts[j], tr.acts[L][j]);
  for (std::size_t l = L; l-- > 0;) {
    const std::size_t in_n = net.sizes[l];
    const std::size_t out_n = net.sizes[l + 1];
    const std::vector<double>& in = tr.acts[l];
    for (std::size_t j = 0; j < out_n; ++j) {
      const double d = delta[j];
      tape.db[l][j] += d;
      double* dwr = tape.dw[l].data() + j * in_n;
      for (std::size_t i = 0; i < in_n; ++i) dwr[i] += d * in[i];
    }
    std::vector<double> prev(in_n, 0.0);
    for (std::size_t j = 0; j < out_n; ++j) {
      const double d = delta[j];
      const double* wr = net.w[l].data() + j * in_n;
      for (std::size_t i = 0; i < in_n; ++i) prev[i] += wr[i] * d;
    }
    if (l > 0)
      for (std::size_t i = 0; i < in_n; ++i)
        prev[i] *= 1.0 - tr.acts[l][i] * tr.acts[l][i];
    delta = std::move(prev);
  }
  return delta;  // dL/dx
}

// Plain SGD step. A tape containing any non-finite entry leaves the
// parameters untouched and reports failure.
inline bool sgd_update(DenseNet& net, const GradientTape& tape, double lr) {
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (double g : tape.dw[l])
      if (!std::isfinite(g)) return false;
    for (double g : tape.db[l])
      if (!std::isfinite(g)) return false;
  }
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (std::size_t k = 0; k < net.w[l].size(); ++k) net.w[l][k] -= lr * tape.dw[l][k];
    for (std::size_t k = 0; k < net.b[l].size(); ++k) net.b[l][k] -= lr * tape.db[l][k];
  }
  return true;
}

// target <- (1 - tau) * live + tau * target
inline void soft_update(const DenseNet& live, DenseNet& target, double tau) {
  if (live.sizes != target.sizes)
    throw std::invalid_argument("soft_update: shape mismatch");
  for (std::size_t l = 0; l < live.layer_count(); ++l) {
    for (std::size_t k = 0; k < live.w[l].size(); ++k)
      target.w[l][k] = (1.0 - tau) * live.w[l][k] + tau * target.w[l][k];
    for (std::size_t k = 0; k < live.b[l].size(); ++k)
      target.b[l][k] = (1.0 - tau) * live.b[l][k] + tau * target.b[l][k];
  }
}

inline void save_net(const DenseNet& net, std::ostream& out) {
  out << "densenet 1\n";
  out << "sizes";
  for (std::size_t s : net.sizes) out << ' ' << s;
  out << "\nouts";
  for (Act a : net.out_acts) out << ' ' << act_name(a);
  out << '\n';
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    out << "layer " << l << '\n';
    for (std::size_t k = 0; k < net.w[l].size(); ++k)
      out << format_number(net.w[l][k]) << (k + 1 == net.w[l].size() ? '\n' : ' ');
    for (std::size_t k = 0; k < net.b[l].size(); ++k)
      out << format_number(net.b[l][k]) << (k + 1 == net.b[l].size() ? '\n' : ' ');
  }
}

inline void save_net(const DenseNet& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_net: cannot open " + path);
  save_net(net, out);
}

inline double parse_double(const std::string& tok) {
  double v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw std::runtime_error("parse_double: bad token '" + tok + "'");
  return v;
}

inline DenseNet load_net(std::istream& in) {
  std::string word, version;
  in >> word >> version;
  if (word != "densenet" || version != "1")
    throw std::runtime_error("load_net: unrecognized header");
  in >> word;
  if (word != "sizes") throw std::runtime_error("load_net: expected sizes");
  DenseNet net;
  std::string line;
  std::getline(in, line);
  {
    std::istringstream ss(line);
    std::size_t s;
    while (ss >> s) net.sizes.push_back(s);
  }
  if (net.sizes.size() < 2) throw std::runtime_error("load_net: bad sizes line");
  in >> word;
  if (word != "outs") throw std::runtime_error("load_net: expected outs");
  std::getline(in, line);
  {
    std::istringstream ss(line);
    std::string name;
    while (ss >> name) net.out_acts.push_back(act_from_name(name));
  }
  if (net.out_acts.size() != net.sizes.back())
    throw std::runtime_error("load_net: output activation count mismatch");
  net.w.resize(net.layer_count());
  net.b.resize(net.layer_count());
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    std::size_t idx;
    in >> word >> idx;
    if (word != "layer" || idx != l) throw std::runtime_error("load_net: bad layer marker");
    const std::size_t wn = net.sizes[l] * net.sizes[l + 1];
    net.w[l].resize(wn);
    net.b[l].resize(net.sizes[l + 1]);
    std::string tok;
    for (std::size_t k = 0; k < wn; ++k) {
      if (!(in >> tok)) throw std::runtime_error("load_net: truncated weights");
      net.w[l][k] = parse_double(tok);
    }
    for (std::size_t k = 0; k < net.b[l].size(); ++k) {
      if (!(in >> tok)) throw std::runtime_error("load_net: truncated biases");
      net.b[l][k] = parse_double(tok);
    }
  }
  return net;
}

inline DenseNet load_net(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_net: cannot open " + path);
  return load_net(in);
}

}  // namespace greenwave
