#include "mdsyn/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "mdsyn/errors.hpp"

namespace mdsyn {

Tape::NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Tensor& Tape::grad_of(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

bool Tape::any_needs_grad(const std::vector<NodeId>& ids) const {
  for (NodeId id : ids) {
    if (nodes_[id].needs_grad) return true;
  }
  return false;
}

Tape::NodeId Tape::constant(Tensor v) {
  Node n;
  n.value = std::move(v);
  return push(std::move(n));
}

Tape::NodeId Tape::param(Parameter& p) {
  Node n;
  n.value = p.value;
  n.needs_grad = true;
  n.bound = &p;
  return push(std::move(n));
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  Node n;
  n.value = mdsyn::matmul(nodes_[a].value, nodes_[b].value);
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [a, b, self](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      if (t.nodes_[a].needs_grad) {
        Tensor da = mdsyn::matmul(g, mdsyn::transpose(t.nodes_[b].value));
        Tensor& ga = t.grad_of(a);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += da[i];
      }
      if (t.nodes_[b].needs_grad) {
        Tensor db = mdsyn::matmul(mdsyn::transpose(t.nodes_[a].value), g);
        Tensor& gb = t.grad_of(b);
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += db[i];
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::transpose(NodeId a) {
  Node n;
  n.value = mdsyn::transpose(nodes_[a].value);
  n.needs_grad = nodes_[a].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [a, self](Tape& t) {
      Tensor dt = mdsyn::transpose(t.nodes_[self].grad);
      Tensor& ga = t.grad_of(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += dt[i];
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  Node n;
  n.value = mdsyn::add(nodes_[a].value, nodes_[b].value);
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [a, b, self](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      for (NodeId src : {a, b}) {
        if (!t.nodes_[src].needs_grad) continue;
        Tensor& gs = t.grad_of(src);
        for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += g[i];
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::add_rowvec(NodeId x, NodeId bias) {
  Node n;
  n.value = mdsyn::add_rowvec(nodes_[x].value, nodes_[bias].value);
  n.needs_grad = nodes_[x].needs_grad || nodes_[bias].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [x, bias, self](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      if (t.nodes_[x].needs_grad) {
        Tensor& gx = t.grad_of(x);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
      }
      if (t.nodes_[bias].needs_grad) {
        Tensor& gb = t.grad_of(bias);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < g.cols(); ++c) gb.at(0, c) += g.at(r, c);
        }
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::relu(NodeId a) {
  Node n;
  n.value = mdsyn::relu(nodes_[a].value);
  n.needs_grad = nodes_[a].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [a, self](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& in = t.nodes_[a].value;
      Tensor& ga = t.grad_of(a);
      for (std::size_t i = 0; i < ga.size(); ++i) {
        if (in[i] > 0.0) ga[i] += g[i];
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::gelu(NodeId a) {
  Node n;
  n.value = mdsyn::gelu(nodes_[a].value);
  n.needs_grad = nodes_[a].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [a, self](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& in = t.nodes_[a].value;
      Tensor& ga = t.grad_of(a);
      constexpr double inv_sqrt2 = 0.70710678118654752440;
      constexpr double inv_sqrt2pi = 0.39894228040143267794;
      for (std::size_t i = 0; i < ga.size(); ++i) {
        const double x = in[i];
        const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
        const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
        ga[i] += g[i] * (cdf + x * pdf);
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::scale(NodeId a, double s) {
  Node n;
  n.value = mdsyn::scale(nodes_[a].value, s);
  n.needs_grad = nodes_[a].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [a, s, self](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      Tensor& ga = t.grad_of(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += s * g[i];
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(parts.size());
  for (NodeId id : parts) ptrs.push_back(&nodes_[id].value);
  Node n;
  n.value = mdsyn::concat_cols(ptrs);
  n.needs_grad = any_needs_grad(parts);
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [parts, self](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      std::size_t offset = 0;
      for (NodeId id : parts) {
        const std::size_t w = t.nodes_[id].value.cols();
        if (t.nodes_[id].needs_grad) {
          Tensor& gp = t.grad_of(id);
          for (std::size_t r = 0; r < gp.rows(); ++r) {
            for (std::size_t c = 0; c < w; ++c) gp.at(r, c) += g.at(r, offset + c);
          }
        }
        offset += w;
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::concat_rows(const std::vector<NodeId>& parts) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(parts.size());
  for (NodeId id : parts) ptrs.push_back(&nodes_[id].value);
  Node n;
  n.value = mdsyn::concat_rows(ptrs);
  n.needs_grad = any_needs_grad(parts);
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [parts, self](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      std::size_t offset = 0;
      for (NodeId id : parts) {
        const std::size_t h = t.nodes_[id].value.rows();
        if (t.nodes_[id].needs_grad) {
          Tensor& gp = t.grad_of(id);
          for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t c = 0; c < gp.cols(); ++c) gp.at(r, c) += g.at(offset + r, c);
          }
        }
        offset += h;
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::mean_rows(NodeId a) {
  Node n;
  n.value = mdsyn::mean_rows(nodes_[a].value);
  n.needs_grad = nodes_[a].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [a, self](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      Tensor& ga = t.grad_of(a);
      const double inv = 1.0 / static_cast<double>(ga.rows());
      for (std::size_t r = 0; r < ga.rows(); ++r) {
        for (std::size_t c = 0; c < ga.cols(); ++c) ga.at(r, c) += inv * g.at(0, c);
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::max_rows(NodeId a) {
  Node n;
  n.value = mdsyn::max_rows(nodes_[a].value);
  n.needs_grad = nodes_[a].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [a, self](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& in = t.nodes_[a].value;
      Tensor& ga = t.grad_of(a);
      for (std::size_t c = 0; c < in.cols(); ++c) {
        std::size_t arg = 0;
        double m = in.at(0, c);
        for (std::size_t r = 1; r < in.rows(); ++r) {
          if (in.at(r, c) > m) {
            m = in.at(r, c);
            arg = r;
          }
        }
        ga.at(arg, c) += g.at(0, c);
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::softmax_rows(NodeId a) {
  Node n;
  n.value = mdsyn::softmax_rows(nodes_[a].value);
  n.needs_grad = nodes_[a].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [a, self](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& y = t.nodes_[self].value;
      Tensor& ga = t.grad_of(a);
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double inner = 0.0;
        for (std::size_t c = 0; c < y.cols(); ++c) inner += g.at(r, c) * y.at(r, c);
        for (std::size_t c = 0; c < y.cols(); ++c) {
          ga.at(r, c) += (g.at(r, c) - inner) * y.at(r, c);
        }
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::layer_norm(NodeId x, NodeId gain, NodeId bias) {
  constexpr double eps = 1e-5;
  const Tensor& in = nodes_[x].value;
  const Tensor& g_t = nodes_[gain].value;
  const Tensor& b_t = nodes_[bias].value;
  if (g_t.rows() != 1 || g_t.cols() != in.cols() || b_t.rows() != 1 || b_t.cols() != in.cols()) {
    throw ShapeError("layer_norm: gain/bias must be 1x" + std::to_string(in.cols()));
  }
  const std::size_t R = in.rows(), C = in.cols();
  Tensor normalized(R, C);
  Tensor inv_std(R, 1);
  Tensor out(R, C);
  for (std::size_t r = 0; r < R; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < C; ++c) mean += in.at(r, c);
    mean /= static_cast<double>(C);
    double var = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double d = in.at(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(C);
    const double istd = 1.0 / std::sqrt(var + eps);
    inv_std.at(r, 0) = istd;
    for (std::size_t c = 0; c < C; ++c) {
      const double xh = (in.at(r, c) - mean) * istd;
      normalized.at(r, c) = xh;
      out.at(r, c) = xh * g_t.at(0, c) + b_t.at(0, c);
    }
  }
  Node n;
  n.value = std::move(out);
  n.needs_grad = nodes_[x].needs_grad || nodes_[gain].needs_grad || nodes_[bias].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [x, gain, bias, self, normalized = std::move(normalized),
              inv_std = std::move(inv_std)](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& gn = t.nodes_[gain].value;
      const std::size_t R = g.rows(), C = g.cols();
      if (t.nodes_[gain].needs_grad) {
        Tensor& gg = t.grad_of(gain);
        for (std::size_t r = 0; r < R; ++r) {
          for (std::size_t c = 0; c < C; ++c) gg.at(0, c) += g.at(r, c) * normalized.at(r, c);
        }
      }
      if (t.nodes_[bias].needs_grad) {
        Tensor& gb = t.grad_of(bias);
        for (std::size_t r = 0; r < R; ++r) {
          for (std::size_t c = 0; c < C; ++c) gb.at(0, c) += g.at(r, c);
        }
      }
      if (t.nodes_[x].needs_grad) {
        Tensor& gx = t.grad_of(x);
        for (std::size_t r = 0; r < R; ++r) {
          double mean_dxh = 0.0, mean_dxh_xh = 0.0;
          for (std::size_t c = 0; c < C; ++c) {
            const double dxh = g.at(r, c) * gn.at(0, c);
            mean_dxh += dxh;
            mean_dxh_xh += dxh * normalized.at(r, c);
          }
          mean_dxh /= static_cast<double>(C);
          mean_dxh_xh /= static_cast<double>(C);
          const double istd = inv_std.at(r, 0);
          for (std::size_t c = 0; c < C; ++c) {
            const double dxh = g.at(r, c) * gn.at(0, c);
            gx.at(r, c) += istd * (dxh - mean_dxh - normalized.at(r, c) * mean_dxh_xh);
          }
        }
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::dropout(NodeId a, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
  if (!training || rate == 0.0) return a;
  const Tensor& in = nodes_[a].value;
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor mask(in.rows(), in.cols());
  Tensor out = in;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (rng.uniform() < rate) {
      out[i] = 0.0;
    } else {
      mask[i] = keep_scale;
      out[i] *= keep_scale;
    }
  }
  Node n;
  n.value = std::move(out);
  n.needs_grad = nodes_[a].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [a, self, mask = std::move(mask)](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      Tensor& ga = t.grad_of(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * mask[i];
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::gather_rows(NodeId table, std::vector<int> indices) {
  const Tensor& src = nodes_[table].value;
  Tensor out(indices.size(), src.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const int idx = indices[r];
    if (idx < 0 || static_cast<std::size_t>(idx) >= src.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(idx) + " out of range");
    }
    for (std::size_t c = 0; c < src.cols(); ++c) out.at(r, c) = src.at(idx, c);
  }
  Node n;
  n.value = std::move(out);
  n.needs_grad = nodes_[table].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [table, self, indices = std::move(indices)](Tape& t) {
      const Tensor& g = t.nodes_[self].grad;
      Tensor& gt = t.grad_of(table);
      for (std::size_t r = 0; r < indices.size(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) gt.at(indices[r], c) += g.at(r, c);
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::cross_entropy(NodeId probs, std::vector<int> labels) {
  constexpr double floor = 1e-12;
  const Tensor& p = nodes_[probs].value;
  if (p.rows() != labels.size()) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " + p.shape_str());
  }
  double loss = 0.0;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    loss -= std::log(std::max(p.at(r, labels[r]), floor));
  }
  loss /= static_cast<double>(p.rows());
  Node n;
  n.value = Tensor(1, 1, {loss});
  n.needs_grad = nodes_[probs].needs_grad;
  if (n.needs_grad) {
    NodeId self = static_cast<NodeId>(nodes_.size());
    n.back = [probs, self, labels = std::move(labels)](Tape& t) {
      const double g = t.nodes_[self].grad.at(0, 0);
      const Tensor& p = t.nodes_[probs].value;
      Tensor& gp = t.grad_of(probs);
      const double inv_n = 1.0 / static_cast<double>(p.rows());
      for (std::size_t r = 0; r < p.rows(); ++r) {
        const double pv = p.at(r, labels[r]);
        if (pv > floor) gp.at(r, labels[r]) -= g * inv_n / pv;
      }
    };
  }
  return push(std::move(n));
}

void Tape::backward(NodeId loss) {
  Node& ln = nodes_[loss];
  if (ln.value.rows() != 1 || ln.value.cols() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + ln.value.shape_str());
  }
  grad_of(loss).at(0, 0) = 1.0;
  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.back) n.back(*this);
    if (n.bound != nullptr) {
      Tensor& pg = n.bound->grad;
      for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += n.grad[i];
    }
  }
}

void Adam::step(const std::vector<Parameter*>& params) {
  for (const Parameter* p : params) {
    if (!p->grad.all_finite()) {
      throw NumericError("non-finite gradient in parameter '" + p->name + "'");
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      p->adam_m[i] = cfg_.beta1 * p->adam_m[i] + (1.0 - cfg_.beta1) * g;
      p->adam_v[i] = cfg_.beta2 * p->adam_v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = p->adam_m[i] / bc1;
      const double vhat = p->adam_v[i] / bc2;
      p->value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    std::fill(p->grad.values().begin(), p->grad.values().end(), 0.0);
  }
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

}  // namespace mdsyn
