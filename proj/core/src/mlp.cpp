#include "isacwave/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "isacwave/errors.hpp"

namespace isacwave {

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Mlp::Layer random_layer(std::size_t in, std::size_t out, double stddev, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, stddev);
    Mlp::Layer l{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            l.weight(r, c) = gauss(rng);
        }
    }
    return l;
}

Eigen::MatrixXd affine(const Eigen::MatrixXd& x, const Mlp::Layer& l) {
    Eigen::MatrixXd z = x * l.weight.transpose();
    z.rowwise() += l.bias.transpose();
    return z;
}

double bce(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            acc += softplus(z(r, c)) - y(r, c) * z(r, c);
        }
    }
    return acc / static_cast<double>(z.size());
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx, std::size_t begin,
                        std::size_t end) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(end - begin), m.cols());
    for (std::size_t i = begin; i < end; ++i) {
        out.row(static_cast<Eigen::Index>(i - begin)) = m.row(static_cast<Eigen::Index>(idx[i]));
    }
    return out;
}

} // namespace

void MlpParams::validate() const {
    if (hidden == 0) {
        throw ConfigError("learn.mlp.hidden must be positive");
    }
    if (!(learning_rate > 0.0)) {
        throw ConfigError("learn.mlp.learning_rate must be positive");
    }
    if (batch_size == 0) {
        throw ConfigError("learn.mlp.batch_size must be positive");
    }
    if (max_epochs == 0) {
        throw ConfigError("learn.mlp.max_epochs must be positive");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("learn.mlp.beta1/beta2 must lie in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) {
        throw ConfigError("learn.mlp.adam_epsilon must be positive");
    }
}

Mlp::Mlp(std::size_t inputs, std::size_t hidden, std::size_t outputs, Rng& rng) {
    layers_[0] = random_layer(inputs, hidden, std::sqrt(2.0 / static_cast<double>(inputs)), rng);
    layers_[1] = random_layer(hidden, hidden, std::sqrt(2.0 / static_cast<double>(hidden)), rng);
    layers_[2] = random_layer(hidden, outputs, std::sqrt(1.0 / static_cast<double>(hidden)), rng);
}

Mlp::Mlp(std::array<Layer, 3> layers) : layers_(std::move(layers)) {
    for (std::size_t i = 0; i < 3; ++i) {
        if (layers_[i].bias.size() != layers_[i].weight.rows()) {
            throw std::invalid_argument("Mlp: bias size does not match layer outputs");
        }
        if (i > 0 && layers_[i].weight.cols() != layers_[i - 1].weight.rows()) {
            throw std::invalid_argument("Mlp: consecutive layer shapes do not chain");
        }
    }
}

std::size_t Mlp::inputs() const noexcept { return static_cast<std::size_t>(layers_[0].weight.cols()); }
std::size_t Mlp::outputs() const noexcept { return static_cast<std::size_t>(layers_[2].weight.rows()); }

Eigen::MatrixXd Mlp::logits(const Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.cols()) != inputs()) {
        throw std::invalid_argument("Mlp: input dimension mismatch");
    }
    const Eigen::MatrixXd h1 = affine(x, layers_[0]).cwiseMax(0.0);
    const Eigen::MatrixXd h2 = affine(h1, layers_[1]).cwiseMax(0.0);
    return affine(h2, layers_[2]);
}

Eigen::MatrixXd Mlp::predict(const Eigen::MatrixXd& x) const {
    return logits(x).unaryExpr([](double z) { return sigmoid(z); });
}

double Mlp::loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const { return bce(logits(x), y); }

double Mlp::loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Eigen::VectorXd& grad) const {
    if (x.rows() != y.rows() || static_cast<std::size_t>(y.cols()) != outputs()) {
        throw std::invalid_argument("Mlp: feature/label shape mismatch");
    }
    const Eigen::MatrixXd a1 = affine(x, layers_[0]);
    const Eigen::MatrixXd h1 = a1.cwiseMax(0.0);
    const Eigen::MatrixXd a2 = affine(h1, layers_[1]);
    const Eigen::MatrixXd h2 = a2.cwiseMax(0.0);
    const Eigen::MatrixXd z = affine(h2, layers_[2]);
    const double loss = bce(z, y);

    const double norm = 1.0 / static_cast<double>(z.size());
    const Eigen::MatrixXd dz = (z.unaryExpr([](double v) { return sigmoid(v); }) - y) * norm;
    const Eigen::MatrixXd gw3 = dz.transpose() * h2;
    const Eigen::VectorXd gb3 = dz.colwise().sum().transpose();
    const Eigen::MatrixXd d2 = ((dz * layers_[2].weight).array() * (a2.array() > 0.0).cast<double>()).matrix();
    const Eigen::MatrixXd gw2 = d2.transpose() * h1;
    const Eigen::VectorXd gb2 = d2.colwise().sum().transpose();
    const Eigen::MatrixXd d1 = ((d2 * layers_[1].weight).array() * (a1.array() > 0.0).cast<double>()).matrix();
    const Eigen::MatrixXd gw1 = d1.transpose() * x;
    const Eigen::VectorXd gb1 = d1.colwise().sum().transpose();

    grad.resize(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index at = 0;
    auto put = [&](const auto& m) {
        grad.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        at += m.size();
    };
    put(gw1);
    put(gb1);
    put(gw2);
    put(gb2);
    put(gw3);
    put(gb3);
    return loss;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) {
        n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    }
    return n;
}

Eigen::VectorXd Mlp::parameters() const {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index at = 0;
    for (const auto& l : layers_) {
        theta.segment(at, l.weight.size()) = Eigen::Map<const Eigen::VectorXd>(l.weight.data(), l.weight.size());
        at += l.weight.size();
        theta.segment(at, l.bias.size()) = l.bias;
        at += l.bias.size();
    }
    return theta;
}

void Mlp::set_parameters(const Eigen::VectorXd& theta) {
    if (static_cast<std::size_t>(theta.size()) != parameter_count()) {
        throw std::invalid_argument("Mlp: parameter vector has the wrong length");
    }
    Eigen::Index at = 0;
    for (auto& l : layers_) {
        Eigen::Map<Eigen::VectorXd>(l.weight.data(), l.weight.size()) = theta.segment(at, l.weight.size());
        at += l.weight.size();
        l.bias = theta.segment(at, l.bias.size());
        at += l.bias.size();
    }
}

Mlp train_mlp(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& x_val,
              const Eigen::MatrixXd& y_val, const MlpParams& params, std::uint64_t seed, MlpHistory* history) {
    params.validate();
    if (x.rows() == 0 || x.rows() != y.rows()) {
        throw std::invalid_argument("train_mlp: feature/label row mismatch");
    }
    Rng rng(seed);
    Mlp net(static_cast<std::size_t>(x.cols()), params.hidden, static_cast<std::size_t>(y.cols()), rng);
    const bool has_val = x_val.rows() > 0;

    Eigen::VectorXd theta = net.parameters();
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd grad;
    Eigen::VectorXd best = theta;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    std::size_t step = 0;

    std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), 0);
    MlpHistory local;
    MlpHistory& h = history != nullptr ? *history : local;
    h = MlpHistory{};

    for (std::size_t epoch = 0; epoch < params.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t begin = 0; begin < order.size(); begin += params.batch_size) {
            const std::size_t end = std::min(order.size(), begin + params.batch_size);
            const Eigen::MatrixXd xb = rows_of(x, order, begin, end);
            const Eigen::MatrixXd yb = rows_of(y, order, begin, end);
            net.loss_and_gradient(xb, yb, grad);
            ++step;
            m1 = params.beta1 * m1 + (1.0 - params.beta1) * grad;
            m2 = params.beta2 * m2 + (1.0 - params.beta2) * grad.cwiseProduct(grad);
            const double c1 = 1.0 - std::pow(params.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(params.beta2, static_cast<double>(step));
            theta -= params.learning_rate *
                     ((m1 / c1).array() / ((m2 / c2).array().sqrt() + params.adam_epsilon)).matrix();
            net.set_parameters(theta);
        }
        const double train_loss = net.loss(x, y);
        const double val_loss = has_val ? net.loss(x_val, y_val) : train_loss;
        h.train_loss.push_back(train_loss);
        h.validation_loss.push_back(val_loss);
        if (val_loss < best_loss - 1e-7) {
            best_loss = val_loss;
            best = theta;
            h.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= params.patience) {
            break;
        }
    }
    net.set_parameters(best);
    return net;
}

} // namespace isacwave
