#include "pinnworks/net.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace pinnworks {

std::string_view to_string(NetworkMode mode) {
  return mode == NetworkMode::symbolic ? "symbolic" : "conventional";
}

NetworkMode parse_network_mode(std::string_view text) {
  if (text == "symbolic") return NetworkMode::symbolic;
  if (text == "conventional") return NetworkMode::conventional;
  throw std::invalid_argument("unknown network mode '" + std::string(text) +
                              "' (expected symbolic or conventional)");
}

std::size_t param_count(std::span<const std::size_t> dims) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l] * dims[l + 1] + dims[l + 1];
  return n;
}

std::size_t SubNetwork::param_count() const { return pinnworks::param_count(dims); }

NetworkLayout::NetworkLayout(NetworkMode mode, std::size_t state_count,
                             std::span<const std::size_t> hidden)
    : mode_(mode), state_count_(state_count) {
  if (state_count == 0) throw std::invalid_argument("network needs at least one output");
  if (hidden.empty()) throw std::invalid_argument("hidden layer widths must not be empty");
  for (std::size_t w : hidden) {
    if (w == 0) throw std::invalid_argument("hidden layer widths must be positive");
  }
  std::vector<std::size_t> dims{1};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  if (mode == NetworkMode::symbolic) {
    dims.push_back(1);
    nets_.assign(state_count, SubNetwork{dims, 0});
  } else {
    dims.push_back(state_count);
    nets_.push_back(SubNetwork{dims, 0});
  }
  finalize();
}

NetworkLayout NetworkLayout::from_dims(NetworkMode mode,
                                       std::vector<std::vector<std::size_t>> dims) {
  NetworkLayout layout;
  layout.mode_ = mode;
  if (dims.empty()) throw ShapeError("layout has no networks");
  for (auto& d : dims) {
    if (d.size() < 2 || d.front() != 1) {
      throw ShapeError("network dims must start with input width 1 and have an output layer");
    }
    for (std::size_t w : d) {
      if (w == 0) throw ShapeError("network dims must be positive");
    }
    layout.nets_.push_back(SubNetwork{std::move(d), 0});
  }
  if (mode == NetworkMode::symbolic) {
    for (const auto& n : layout.nets_) {
      if (n.output_dim() != 1) throw ShapeError("symbolic sub-networks must have one output");
    }
    layout.state_count_ = layout.nets_.size();
  } else {
    if (layout.nets_.size() != 1) throw ShapeError("conventional mode uses exactly one network");
    layout.state_count_ = layout.nets_.front().output_dim();
  }
  layout.finalize();
  return layout;
}

void NetworkLayout::finalize() {
  std::size_t offset = 0;
  for (auto& n : nets_) {
    n.offset = offset;
    offset += n.param_count();
  }
  param_count_ = offset;
}

std::string NetworkLayout::describe() const {
  std::ostringstream os;
  os << to_string(mode_) << ' ';
  if (nets_.size() > 1) os << nets_.size() << 'x';
  os << '[';
  const auto& dims = nets_.front().dims;
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << "] (" << param_count_ << " parameters)";
  return os.str();
}

namespace {

void check_theta(const NetworkLayout& layout, std::size_t size) {
  if (size != layout.param_count()) {
    throw ShapeError("theta has " + std::to_string(size) + " entries but " +
                     layout.describe() + " needs " + std::to_string(layout.param_count()));
  }
}

// Forward pass carrying d/dt alongside the value. Generic so the same code
// runs on doubles and on taped variables.
template <typename T>
void jet_forward(const NetworkLayout& layout, const T& t, std::span<const T> theta,
                 std::vector<T>& value, std::vector<T>* rate) {
  using std::tanh;
  value.assign(layout.state_count(), T(0.0));
  if (rate) rate->assign(layout.state_count(), T(0.0));
  std::vector<T> a, ad, z, zd;
  for (std::size_t k = 0; k < layout.networks().size(); ++k) {
    const SubNetwork& net = layout.networks()[k];
    a.assign(1, t);
    ad.assign(1, T(1.0));
    std::size_t off = net.offset;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      const std::size_t in = net.dims[l];
      const std::size_t out = net.dims[l + 1];
      const T* w = theta.data() + off;
      const T* b = w + in * out;
      z.assign(out, T(0.0));
      zd.assign(out, T(0.0));
      for (std::size_t o = 0; o < out; ++o) {
        T acc = b[o];
        T accd = T(0.0);
        for (std::size_t i = 0; i < in; ++i) {
          acc = acc + w[o * in + i] * a[i];
          if (rate) accd = accd + w[o * in + i] * ad[i];
        }
        z[o] = acc;
        zd[o] = accd;
      }
      off += in * out + out;
      if (l + 1 < net.layer_count()) {
        a.resize(out);
        ad.resize(out);
        for (std::size_t o = 0; o < out; ++o) {
          a[o] = tanh(z[o]);
          ad[o] = (T(1.0) - a[o] * a[o]) * zd[o];
        }
      } else {
        a = z;
        ad = zd;
      }
    }
    const std::size_t first = layout.first_output(k);
    for (std::size_t o = 0; o < net.output_dim(); ++o) {
      value[first + o] = a[o];
      if (rate) (*rate)[first + o] = ad[o];
    }
  }
}

// Uniform in [0, 1) from the top 53 bits; fixed mapping so streams are
// portable across standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<std::vector<Layer>> unflatten(const NetworkLayout& layout,
                                          std::span<const double> theta) {
  check_theta(layout, theta.size());
  std::vector<std::vector<Layer>> out;
  for (const auto& net : layout.networks()) {
    std::vector<Layer> layers;
    std::size_t off = net.offset;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      Layer layer;
      layer.in = net.dims[l];
      layer.out = net.dims[l + 1];
      const auto* p = theta.data() + off;
      layer.weights.assign(p, p + layer.in * layer.out);
      p += layer.in * layer.out;
      layer.bias.assign(p, p + layer.out);
      off += layer.in * layer.out + layer.out;
      layers.push_back(std::move(layer));
    }
    out.push_back(std::move(layers));
  }
  return out;
}

std::vector<double> flatten(const NetworkLayout& layout,
                            const std::vector<std::vector<Layer>>& layers) {
  if (layers.size() != layout.networks().size()) throw ShapeError("network count mismatch");
  std::vector<double> theta;
  theta.reserve(layout.param_count());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& net = layout.networks()[k];
    if (layers[k].size() != net.layer_count()) throw ShapeError("layer count mismatch");
    for (std::size_t l = 0; l < layers[k].size(); ++l) {
      const Layer& layer = layers[k][l];
      if (layer.in != net.dims[l] || layer.out != net.dims[l + 1] ||
          layer.weights.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
        throw ShapeError("layer shape mismatch");
      }
      theta.insert(theta.end(), layer.weights.begin(), layer.weights.end());
      theta.insert(theta.end(), layer.bias.begin(), layer.bias.end());
    }
  }
  return theta;
}

NetworkEnsemble init_ensemble(NetworkMode mode, std::size_t state_count,
                              std::span<const std::size_t> hidden, std::uint64_t seed) {
  NetworkEnsemble ens{NetworkLayout(mode, state_count, hidden), {}};
  ens.theta.assign(ens.layout.param_count(), 0.0);
  std::mt19937_64 rng(seed);
  for (const auto& net : ens.layout.networks()) {
    std::size_t off = net.offset;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      const std::size_t in = net.dims[l];
      const std::size_t out = net.dims[l + 1];
      const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
      for (std::size_t i = 0; i < in * out; ++i) {
        ens.theta[off + i] = -limit + 2.0 * limit * uniform01(rng);
      }
      off += in * out + out;  // biases stay zero
    }
  }
  return ens;
}

std::vector<double> forward(const NetworkLayout& layout, double t,
                            std::span<const double> theta) {
  check_theta(layout, theta.size());
  std::vector<double> value;
  jet_forward<double>(layout, t, theta, value, nullptr);
  return value;
}

TimeJet forward_with_time_derivative(const NetworkLayout& layout, double t,
                                     std::span<const double> theta) {
  check_theta(layout, theta.size());
  TimeJet jet;
  jet_forward<double>(layout, t, theta, jet.value, &jet.time_derivative);
  return jet;
}

// ---------------------------------------------------------------------------

NetworkEvaluator::NetworkEvaluator(const NetworkLayout& layout) : layout_(layout) {
  for (const auto& net : layout_.networks()) {
    Buffers b;
    for (std::size_t w : net.dims) {
      b.act.emplace_back(w, 0.0);
      b.tan.emplace_back(w, 0.0);
      b.zdot.emplace_back(w, 0.0);
    }
    std::size_t widest = 0;
    for (std::size_t w : net.dims) widest = std::max(widest, w);
    b.g_z.resize(widest);
    b.g_zd.resize(widest);
    b.g_a.resize(widest);
    b.g_ad.resize(widest);
    buffers_.push_back(std::move(b));
  }
  value_.resize(layout_.state_count());
  rate_.resize(layout_.state_count());
}

void NetworkEvaluator::evaluate(double t, std::span<const double> theta) {
  check_theta(layout_, theta.size());
  for (std::size_t k = 0; k < layout_.networks().size(); ++k) {
    const SubNetwork& net = layout_.networks()[k];
    Buffers& buf = buffers_[k];
    buf.act[0][0] = t;
    buf.tan[0][0] = 1.0;
    const double* p = theta.data() + net.offset;
    const std::size_t layers = net.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = net.dims[l];
      const std::size_t out = net.dims[l + 1];
      const double* w = p;
      const double* b = p + in * out;
      const double* a = buf.act[l].data();
      const double* ad = buf.tan[l].data();
      double* a_next = buf.act[l + 1].data();
      double* ad_next = buf.tan[l + 1].data();
      double* zd = buf.zdot[l + 1].data();
      const bool hidden = l + 1 < layers;
      for (std::size_t o = 0; o < out; ++o) {
        const double* row = w + o * in;
        double z = b[o];
        double dz = 0.0;
        for (std::size_t i = 0; i < in; ++i) {
          z += row[i] * a[i];
          dz += row[i] * ad[i];
        }
        zd[o] = dz;
        if (hidden) {
          const double h = std::tanh(z);
          a_next[o] = h;
          ad_next[o] = (1.0 - h * h) * dz;
        } else {
          a_next[o] = z;
          ad_next[o] = dz;
        }
      }
      p += in * out + out;
    }
    const std::size_t first = layout_.first_output(k);
    for (std::size_t o = 0; o < net.output_dim(); ++o) {
      value_[first + o] = buf.act[layers][o];
      rate_[first + o] = buf.tan[layers][o];
    }
  }
}

void NetworkEvaluator::backpropagate(std::span<const double> theta,
                                     std::span<const double> adj_value,
                                     std::span<const double> adj_rate,
                                     std::span<double> grad) {
  for (std::size_t k = 0; k < layout_.networks().size(); ++k) {
    const SubNetwork& net = layout_.networks()[k];
    Buffers& buf = buffers_[k];
    const std::size_t layers = net.layer_count();
    const std::size_t first = layout_.first_output(k);

    bool any = false;
    for (std::size_t o = 0; o < net.output_dim(); ++o) {
      buf.g_z[o] = adj_value[first + o];
      buf.g_zd[o] = adj_rate[first + o];
      any = any || buf.g_z[o] != 0.0 || buf.g_zd[o] != 0.0;
    }
    if (!any) continue;

    // Offsets of each layer's block inside theta.
    std::size_t off = net.offset + net.param_count();
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = net.dims[l];
      const std::size_t out = net.dims[l + 1];
      off -= in * out + out;
      const double* w = theta.data() + off;
      double* gw = grad.data() + off;
      double* gb = gw + in * out;
      const double* a = buf.act[l].data();
      const double* ad = buf.tan[l].data();

      for (std::size_t o = 0; o < out; ++o) {
        const double gz = buf.g_z[o];
        const double gzd = buf.g_zd[o];
        double* grow = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) grow[i] += gz * a[i] + gzd * ad[i];
        gb[o] += gz;
      }
      if (l == 0) break;

      // Adjoints of the incoming activation and its tangent.
      for (std::size_t i = 0; i < in; ++i) {
        buf.g_a[i] = 0.0;
        buf.g_ad[i] = 0.0;
      }
      for (std::size_t o = 0; o < out; ++o) {
        const double gz = buf.g_z[o];
        const double gzd = buf.g_zd[o];
        const double* row = w + o * in;
        for (std::size_t i = 0; i < in; ++i) {
          buf.g_a[i] += row[i] * gz;
          buf.g_ad[i] += row[i] * gzd;
        }
      }
      // Through a = tanh(z), ad = (1 - a^2) zd.
      const double* zd = buf.zdot[l].data();
      for (std::size_t i = 0; i < in; ++i) {
        const double s = 1.0 - a[i] * a[i];
        buf.g_zd[i] = buf.g_ad[i] * s;
        buf.g_z[i] = s * (buf.g_a[i] - 2.0 * a[i] * zd[i] * buf.g_ad[i]);
      }
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<ad::Var> TapedNetwork::forward(double t) const {
  std::vector<ad::Var> value;
  jet_forward<ad::Var>(layout_, ad::Var(t), theta_, value, nullptr);
  return value;
}

std::pair<std::vector<ad::Var>, std::vector<ad::Var>> TapedNetwork::forward_with_time_derivative(
    double t) const {
  std::vector<ad::Var> value;
  std::vector<ad::Var> rate;
  jet_forward<ad::Var>(layout_, ad::Var(t), theta_, value, &rate);
  return {std::move(value), std::move(rate)};
}

GradientResult param_gradient(const NetworkLayout& layout, std::span<const double> theta,
                              const TapedLoss& loss) {
  check_theta(layout, theta.size());
  ad::Tape tape;
  std::vector<ad::Var> vars;
  vars.reserve(theta.size());
  for (double v : theta) vars.push_back(tape.variable(v));
  const TapedNetwork net(layout, vars);
  const ad::Var out = loss(net);
  const std::vector<double> adj = tape.adjoints(out);
  GradientResult result;
  result.value = out.value();
  result.gradient.resize(theta.size());
  for (std::size_t i = 0; i < vars.size(); ++i) result.gradient[i] = adj[vars[i].index()];
  return result;
}

}  // namespace pinnworks
