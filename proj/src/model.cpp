#include "bandgen/model.hpp"

#include "bandgen/error.hpp"
#include "bandgen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bandgen {

WidthMode parse_width_mode(const std::string& s)
{
    if (s == "bwr")
        return WidthMode::BwR;
    if (s == "baseline")
        return WidthMode::Baseline;
    throw InputError("unknown mode '" + s + "' (expected bwr or baseline)");
}

const char* to_string(WidthMode m) noexcept
{
    return m == WidthMode::BwR ? "bwr" : "baseline";
}

void ModelConfig::validate() const
{
    if (row_width < 2)
        throw InputError("row_width must be >= 2 (indicator plus one band column)");
    if (hidden < 1 || mlp_hidden < 1 || gru_layers < 1)
        throw InputError("hidden, mlp_hidden and gru_layers must be positive");
    if (!(temperature > 0.0))
        throw InputError("temperature must be > 0");
    if (epochs < 0 || batches_per_epoch < 1 || batch_size < 1 || val_batches < 0)
        throw InputError("epochs, batches_per_epoch, batch_size and val_batches must be valid counts");
    if (max_nodes < 1)
        throw InputError("max_nodes must be >= 1");
    if (lr < 0.0 || weight_decay < 0.0)
        throw InputError("lr and weight_decay must be non-negative");
}

void to_json(nlohmann::json& j, const ModelConfig& c)
{
    j = nlohmann::json{{"row_width", c.row_width},
                       {"hidden", c.hidden},
                       {"gru_layers", c.gru_layers},
                       {"mlp_hidden", c.mlp_hidden},
                       {"lr", c.lr},
                       {"weight_decay", c.weight_decay},
                       {"epochs", c.epochs},
                       {"batches_per_epoch", c.batches_per_epoch},
                       {"val_batches", c.val_batches},
                       {"batch_size", c.batch_size},
                       {"temperature", c.temperature},
                       {"max_nodes", c.max_nodes},
                       {"seed", c.seed},
                       {"bn_momentum", c.bn_momentum},
                       {"bn_eps", c.bn_eps}};
}

void from_json(const nlohmann::json& j, ModelConfig& c)
{
    j.at("row_width").get_to(c.row_width);
    j.at("hidden").get_to(c.hidden);
    j.at("gru_layers").get_to(c.gru_layers);
    j.at("mlp_hidden").get_to(c.mlp_hidden);
    j.at("lr").get_to(c.lr);
    j.at("weight_decay").get_to(c.weight_decay);
    j.at("epochs").get_to(c.epochs);
    j.at("batches_per_epoch").get_to(c.batches_per_epoch);
    j.at("val_batches").get_to(c.val_batches);
    j.at("batch_size").get_to(c.batch_size);
    j.at("temperature").get_to(c.temperature);
    j.at("max_nodes").get_to(c.max_nodes);
    j.at("seed").get_to(c.seed);
    j.at("bn_momentum").get_to(c.bn_momentum);
    j.at("bn_eps").get_to(c.bn_eps);
}

namespace {

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng)
{
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = rng.uniform(-bound, bound);
    return m;
}

void linear_init(Matrix& w, Matrix& b, int out, int in, Rng& rng)
{
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    w = uniform_matrix(out, in, bound, rng);
    b = uniform_matrix(out, 1, bound, rng);
}

} // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    Rng rng(seed);
    ModelParams p;
    const int d = cfg.row_width, h = cfg.hidden, m = cfg.mlp_hidden;
    linear_init(p.in1_w, p.in1_b, m, d, rng);
    p.bn1_gamma = Matrix::Ones(m, 1);
    p.bn1_beta = Matrix::Zero(m, 1);
    linear_init(p.in2_w, p.in2_b, h, m, rng);
    p.gru.resize(static_cast<std::size_t>(cfg.gru_layers));
    const double bound = 1.0 / std::sqrt(static_cast<double>(h));
    for (auto& layer : p.gru) {
        layer.w_ih = uniform_matrix(3 * h, h, bound, rng);
        layer.w_hh = uniform_matrix(3 * h, h, bound, rng);
        layer.b_ih = uniform_matrix(3 * h, 1, bound, rng);
        layer.b_hh = uniform_matrix(3 * h, 1, bound, rng);
    }
    linear_init(p.out1_w, p.out1_b, m, h, rng);
    p.bn2_gamma = Matrix::Ones(m, 1);
    p.bn2_beta = Matrix::Zero(m, 1);
    linear_init(p.out2_w, p.out2_b, d, m, rng);
    p.bn1_mean = Matrix::Zero(m, 1);
    p.bn1_var = Matrix::Ones(m, 1);
    p.bn2_mean = Matrix::Zero(m, 1);
    p.bn2_var = Matrix::Ones(m, 1);
    return p;
}

ModelParams ModelParams::zeros(const ModelConfig& cfg)
{
    ModelParams p = init(cfg, 0).zeros_like();
    p.bn1_var.setOnes();
    p.bn2_var.setOnes();
    return p;
}

std::vector<std::pair<std::string, Matrix*>> ModelParams::tensors()
{
    std::vector<std::pair<std::string, Matrix*>> out{{"input.linear1.weight", &in1_w},
                                                     {"input.linear1.bias", &in1_b},
                                                     {"input.norm.weight", &bn1_gamma},
                                                     {"input.norm.bias", &bn1_beta},
                                                     {"input.linear2.weight", &in2_w},
                                                     {"input.linear2.bias", &in2_b}};
    for (std::size_t l = 0; l < gru.size(); ++l) {
        const auto prefix = "gru.layer" + std::to_string(l) + ".";
        out.emplace_back(prefix + "weight_ih", &gru[l].w_ih);
        out.emplace_back(prefix + "weight_hh", &gru[l].w_hh);
        out.emplace_back(prefix + "bias_ih", &gru[l].b_ih);
        out.emplace_back(prefix + "bias_hh", &gru[l].b_hh);
    }
    out.emplace_back("output.linear1.weight", &out1_w);
    out.emplace_back("output.linear1.bias", &out1_b);
    out.emplace_back("output.norm.weight", &bn2_gamma);
    out.emplace_back("output.norm.bias", &bn2_beta);
    out.emplace_back("output.linear2.weight", &out2_w);
    out.emplace_back("output.linear2.bias", &out2_b);
    return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::tensors() const
{
    std::vector<std::pair<std::string, const Matrix*>> out;
    for (auto& [name, ptr] : const_cast<ModelParams*>(this)->tensors())
        out.emplace_back(name, ptr);
    return out;
}

std::vector<std::pair<std::string, Matrix*>> ModelParams::buffers()
{
    return {{"input.norm.running_mean", &bn1_mean},
            {"input.norm.running_var", &bn1_var},
            {"output.norm.running_mean", &bn2_mean},
            {"output.norm.running_var", &bn2_var}};
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::buffers() const
{
    std::vector<std::pair<std::string, const Matrix*>> out;
    for (auto& [name, ptr] : const_cast<ModelParams*>(this)->buffers())
        out.emplace_back(name, ptr);
    return out;
}

ModelParams ModelParams::zeros_like() const
{
    ModelParams z = *this;
    for (auto& [name, t] : z.tensors())
        t->setZero();
    for (auto& [name, t] : z.buffers())
        t->setZero();
    return z;
}

bool ModelParams::all_finite() const
{
    for (const auto& [name, t] : tensors())
        if (!t->allFinite())
            return false;
    for (const auto& [name, t] : buffers())
        if (!t->allFinite())
            return false;
    return true;
}

PackedBatch pack_sequences(const std::vector<const TrainSequence*>& seqs)
{
    PackedBatch b;
    if (seqs.empty())
        throw InputError("cannot pack an empty batch");
    b.width = seqs.front()->row_width;
    std::vector<int> order(seqs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return seqs[static_cast<std::size_t>(x)]->num_rows > seqs[static_cast<std::size_t>(y)]->num_rows;
    });
    for (int i : order) {
        const auto* s = seqs[static_cast<std::size_t>(i)];
        if (s->row_width != b.width)
            throw InputError("sequences in a batch must share a row width");
        b.source_index.push_back(i);
        b.lengths.push_back(s->num_rows - 1);
    }
    const int steps = b.lengths.front();
    int total = 0;
    for (int t = 0; t < steps; ++t) {
        int active = 0;
        while (active < static_cast<int>(b.lengths.size()) && b.lengths[static_cast<std::size_t>(active)] > t)
            ++active;
        b.offsets.push_back(total);
        b.batch_sizes.push_back(active);
        total += active;
    }
    b.inputs.resize(total, b.width);
    b.targets.resize(total, b.width);
    for (int t = 0; t < steps; ++t)
        for (int k = 0; k < b.batch_sizes[static_cast<std::size_t>(t)]; ++k) {
            const auto* s = seqs[static_cast<std::size_t>(b.source_index[static_cast<std::size_t>(k)])];
            const int r = b.offsets[static_cast<std::size_t>(t)] + k;
            const auto in = s->row(t);
            const auto out = s->row(t + 1);
            for (int c = 0; c < b.width; ++c) {
                b.inputs(r, c) = in[static_cast<std::size_t>(c)];
                b.targets(r, c) = out[static_cast<std::size_t>(c)];
            }
        }
    return b;
}

PackedBatch pack_sequences(const std::vector<TrainSequence>& seqs)
{
    std::vector<const TrainSequence*> ptrs;
    for (const auto& s : seqs)
        ptrs.push_back(&s);
    return pack_sequences(ptrs);
}

namespace {

Matrix sigmoid(const Matrix& x)
{
    return (1.0 + (-x.array()).exp()).inverse().matrix();
}

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b)
{
    Matrix y = x * w.transpose();
    y.rowwise() += b.col(0).transpose();
    return y;
}

struct NormOut {
    Matrix xhat, y;
    RowVector mean, invstd;
};

NormOut norm_forward(const Matrix& a, const Matrix& gamma, const Matrix& beta, Matrix& running_mean,
                     Matrix& running_var, NormMode mode, bool update_running, double momentum, double eps)
{
    NormOut o;
    const auto rows = static_cast<double>(a.rows());
    if (mode == NormMode::Train) {
        o.mean = a.colwise().mean();
        const Matrix centered = a.rowwise() - o.mean;
        const RowVector var = centered.array().square().colwise().sum() / rows;
        o.invstd = (var.array() + eps).rsqrt();
        o.xhat = centered.array().rowwise() * o.invstd.array();
        if (update_running) {
            const double unbias = rows > 1.0 ? rows / (rows - 1.0) : 1.0;
            running_mean = (1.0 - momentum) * running_mean + momentum * o.mean.transpose();
            running_var = (1.0 - momentum) * running_var + momentum * unbias * var.transpose();
        }
    } else {
        o.mean = running_mean.col(0).transpose();
        o.invstd = (running_var.col(0).transpose().array() + eps).rsqrt();
        o.xhat = (a.rowwise() - o.mean).array().rowwise() * o.invstd.array();
    }
    o.y = (o.xhat.array().rowwise() * gamma.col(0).transpose().array()).matrix();
    o.y.rowwise() += beta.col(0).transpose();
    return o;
}

Matrix norm_backward(const Matrix& dy, const Matrix& xhat, const RowVector& invstd, const Matrix& gamma,
                     NormMode mode, Matrix& dgamma, Matrix& dbeta)
{
    dgamma = (dy.array() * xhat.array()).colwise().sum().transpose();
    dbeta = dy.colwise().sum().transpose();
    const Matrix dxhat = dy.array().rowwise() * gamma.col(0).transpose().array();
    if (mode == NormMode::Eval)
        return dxhat.array().rowwise() * invstd.array();
    const auto rows = static_cast<double>(dy.rows());
    const RowVector sum_dxhat = dxhat.colwise().sum();
    const RowVector sum_dxhat_xhat = (dxhat.array() * xhat.array()).colwise().sum();
    Matrix da = (rows * dxhat.array()).matrix();
    da.rowwise() -= sum_dxhat;
    da -= (xhat.array().rowwise() * sum_dxhat_xhat.array()).matrix();
    return (da.array().rowwise() * (invstd.array() / rows)).matrix();
}

Matrix relu(const Matrix& x)
{
    return x.cwiseMax(0.0);
}

} // namespace

Matrix forward(ModelParams& p, const PackedBatch& batch, NormMode mode, ForwardCache* cache, bool update_running,
               double momentum, double eps)
{
    if (batch.width != p.input_width())
        throw InputError("batch row width " + std::to_string(batch.width) + " does not match model width " +
                         std::to_string(p.input_width()));
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.mode = mode;

    c.a1 = affine(batch.inputs, p.in1_w, p.in1_b);
    auto n1 = norm_forward(c.a1, p.bn1_gamma, p.bn1_beta, p.bn1_mean, p.bn1_var, mode, update_running, momentum, eps);
    c.xhat1 = std::move(n1.xhat);
    c.y1 = std::move(n1.y);
    c.mean1 = n1.mean;
    c.invstd1 = n1.invstd;
    c.h1 = relu(c.y1);
    c.x1 = affine(c.h1, p.in2_w, p.in2_b);

    const auto h = static_cast<Eigen::Index>(p.in2_w.rows());
    const auto steps = batch.batch_sizes.size();
    c.layer_in.clear();
    c.layer_out.clear();
    c.r.clear();
    c.z.clear();
    c.n.clear();
    c.ghn.clear();
    const Matrix* input = &c.x1;
    for (const auto& layer : p.gru) {
        c.layer_in.push_back(*input);
        Matrix out(input->rows(), h), r(input->rows(), h), z(input->rows(), h), n(input->rows(), h),
            ghn(input->rows(), h);
        const Matrix gi_all = affine(*input, layer.w_ih, layer.b_ih);
        for (std::size_t t = 0; t < steps; ++t) {
            const Eigen::Index off = batch.offsets[t];
            const Eigen::Index bs = batch.batch_sizes[t];
            Matrix hprev = t == 0 ? Matrix::Zero(bs, h) : Matrix(out.middleRows(batch.offsets[t - 1], bs));
            const Matrix gh = affine(hprev, layer.w_hh, layer.b_hh);
            const auto gi = gi_all.middleRows(off, bs);
            r.middleRows(off, bs) = sigmoid(gi.leftCols(h) + gh.leftCols(h));
            z.middleRows(off, bs) = sigmoid(gi.middleCols(h, h) + gh.middleCols(h, h));
            ghn.middleRows(off, bs) = gh.rightCols(h);
            n.middleRows(off, bs) =
                (gi.rightCols(h).array() + r.middleRows(off, bs).array() * gh.rightCols(h).array()).tanh().matrix();
            out.middleRows(off, bs) =
                ((1.0 - z.middleRows(off, bs).array()) * n.middleRows(off, bs).array() +
                 z.middleRows(off, bs).array() * hprev.array())
                    .matrix();
        }
        c.layer_out.push_back(std::move(out));
        c.r.push_back(std::move(r));
        c.z.push_back(std::move(z));
        c.n.push_back(std::move(n));
        c.ghn.push_back(std::move(ghn));
        input = &c.layer_out.back();
    }

    c.a2 = affine(*input, p.out1_w, p.out1_b);
    auto n2 = norm_forward(c.a2, p.bn2_gamma, p.bn2_beta, p.bn2_mean, p.bn2_var, mode, update_running, momentum, eps);
    c.xhat2 = std::move(n2.xhat);
    c.y2 = std::move(n2.y);
    c.mean2 = n2.mean;
    c.invstd2 = n2.invstd;
    c.h2 = relu(c.y2);
    c.logits = affine(c.h2, p.out2_w, p.out2_b);
    return c.logits;
}

double sum_bce(const Matrix& logits, const Matrix& targets)
{
    if (logits.rows() != targets.rows() || logits.cols() != targets.cols())
        throw InputError("logits and targets differ in shape");
    const auto l = logits.array();
    return (l.max(0.0) - l * targets.array() + (-l.abs()).exp().log1p()).sum();
}

double loss_bce(const Matrix& logits, const Matrix& targets)
{
    return sum_bce(logits, targets) / static_cast<double>(logits.size());
}

ModelParams backward(const ModelParams& p, const PackedBatch& batch, const ForwardCache& c, double /*eps*/)
{
    ModelParams g = p.zeros_like();
    const Matrix dlogits = (sigmoid(c.logits) - batch.targets) / static_cast<double>(c.logits.size());

    g.out2_w = dlogits.transpose() * c.h2;
    g.out2_b = dlogits.colwise().sum().transpose();
    Matrix dy2 = (dlogits * p.out2_w).array() * (c.y2.array() > 0.0).cast<double>();
    const Matrix da2 = norm_backward(dy2, c.xhat2, c.invstd2, p.bn2_gamma, c.mode, g.bn2_gamma, g.bn2_beta);
    const Matrix& top = c.layer_out.back();
    g.out1_w = da2.transpose() * top;
    g.out1_b = da2.colwise().sum().transpose();
    Matrix dout = da2 * p.out1_w;

    const auto h = static_cast<Eigen::Index>(p.in2_w.rows());
    const auto steps = batch.batch_sizes.size();
    for (std::size_t li = p.gru.size(); li-- > 0;) {
        const auto& layer = p.gru[li];
        auto& gl = g.gru[li];
        const Matrix& x = c.layer_in[li];
        const Matrix& out = c.layer_out[li];
        const Matrix& r = c.r[li];
        const Matrix& z = c.z[li];
        const Matrix& n = c.n[li];
        const Matrix& ghn = c.ghn[li];

        Matrix dgi(x.rows(), 3 * h);
        Matrix carry; // gradient flowing into h_{t} from step t + 1
        for (std::size_t t = steps; t-- > 0;) {
            const Eigen::Index off = batch.offsets[t];
            const Eigen::Index bs = batch.batch_sizes[t];
            Matrix dh = dout.middleRows(off, bs);
            if (carry.rows() > 0)
                dh.topRows(carry.rows()) += carry;
            const Matrix hprev = t == 0 ? Matrix::Zero(bs, h) : Matrix(out.middleRows(batch.offsets[t - 1], bs));
            const auto rt = r.middleRows(off, bs).array();
            const auto zt = z.middleRows(off, bs).array();
            const auto nt = n.middleRows(off, bs).array();
            const auto ghnt = ghn.middleRows(off, bs).array();

            const Matrix dan = (dh.array() * (1.0 - zt) * (1.0 - nt.square())).matrix();
            const Matrix daz = (dh.array() * (hprev.array() - nt) * zt * (1.0 - zt)).matrix();
            const Matrix dar = (dan.array() * ghnt * rt * (1.0 - rt)).matrix();

            Matrix dgh(bs, 3 * h);
            dgh.leftCols(h) = dar;
            dgh.middleCols(h, h) = daz;
            dgh.rightCols(h) = (dan.array() * rt).matrix();
            dgi.middleRows(off, bs).leftCols(h) = dar;
            dgi.middleRows(off, bs).middleCols(h, h) = daz;
            dgi.middleRows(off, bs).rightCols(h) = dan;

            gl.w_hh += dgh.transpose() * hprev;
            gl.b_hh += dgh.colwise().sum().transpose();
            carry = (dh.array() * zt).matrix() + dgh * layer.w_hh;
        }
        gl.w_ih = dgi.transpose() * x;
        gl.b_ih = dgi.colwise().sum().transpose();
        dout = dgi * layer.w_ih;
    }

    g.in2_w = dout.transpose() * c.h1;
    g.in2_b = dout.colwise().sum().transpose();
    Matrix dy1 = (dout * p.in2_w).array() * (c.y1.array() > 0.0).cast<double>();
    const Matrix da1 = norm_backward(dy1, c.xhat1, c.invstd1, p.bn1_gamma, c.mode, g.bn1_gamma, g.bn1_beta);
    g.in1_w = da1.transpose() * batch.inputs;
    g.in1_b = da1.colwise().sum().transpose();
    return g;
}

Stepper::Stepper(const ModelParams& params, double eps) : params_(params), eps_(eps)
{
    const auto h = params.in2_w.rows();
    hidden_.assign(params.gru.size(), RowVector::Zero(h));
}

RowVector Stepper::step(const RowVector& row)
{
    const auto& p = params_;
    const auto h = p.in2_w.rows();
    const auto norm = [&](const RowVector& a, const Matrix& gamma, const Matrix& beta, const Matrix& mean,
                          const Matrix& var) {
        RowVector y = ((a - mean.col(0).transpose()).array() * (var.col(0).transpose().array() + eps_).rsqrt() *
                       gamma.col(0).transpose().array())
                          .matrix() +
                      beta.col(0).transpose();
        return y;
    };
    RowVector a1 = row * p.in1_w.transpose() + p.in1_b.col(0).transpose();
    RowVector x = norm(a1, p.bn1_gamma, p.bn1_beta, p.bn1_mean, p.bn1_var).cwiseMax(0.0) * p.in2_w.transpose() +
                  p.in2_b.col(0).transpose();
    for (std::size_t l = 0; l < p.gru.size(); ++l) {
        const auto& layer = p.gru[l];
        const RowVector gi = x * layer.w_ih.transpose() + layer.b_ih.col(0).transpose();
        const RowVector gh = hidden_[l] * layer.w_hh.transpose() + layer.b_hh.col(0).transpose();
        const RowVector r = sigmoid(gi.leftCols(h) + gh.leftCols(h));
        const RowVector z = sigmoid(gi.middleCols(h, h) + gh.middleCols(h, h));
        const RowVector n = (gi.rightCols(h).array() + r.array() * gh.rightCols(h).array()).tanh().matrix();
        hidden_[l] = ((1.0 - z.array()) * n.array() + z.array() * hidden_[l].array()).matrix();
        x = hidden_[l];
    }
    RowVector a2 = x * p.out1_w.transpose() + p.out1_b.col(0).transpose();
    return norm(a2, p.bn2_gamma, p.bn2_beta, p.bn2_mean, p.bn2_var).cwiseMax(0.0) * p.out2_w.transpose() +
           p.out2_b.col(0).transpose();
}

void AdamW::update(ModelParams& params, const ModelParams& grad, double lr, double weight_decay)
{
    ++step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    auto pt = params.tensors();
    const auto gt = grad.tensors();
    auto mt = m.tensors();
    auto vt = v.tensors();
    for (std::size_t i = 0; i < pt.size(); ++i) {
        Matrix& w = *pt[i].second;
        const Matrix& gw = *gt[i].second;
        Matrix& mw = *mt[i].second;
        Matrix& vw = *vt[i].second;
        w *= 1.0 - lr * weight_decay;
        mw = beta1 * mw + (1.0 - beta1) * gw;
        vw = beta2 * vw + (1.0 - beta2) * gw.cwiseAbs2();
        w.array() -= lr * (mw.array() / c1) / ((vw.array() / c2).sqrt() + eps);
    }
}

double cosine_lr(double base_lr, long step, long total_steps)
{
    if (total_steps <= 1)
        return base_lr;
    const double progress = static_cast<double>(std::min(step, total_steps - 1)) / static_cast<double>(total_steps - 1);
    return 0.5 * base_lr * (1.0 + std::cos(M_PI * progress));
}

} // namespace bandgen
