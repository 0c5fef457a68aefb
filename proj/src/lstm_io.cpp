#include "vlab/lstm_io.hpp"

#include "vlab/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace vlab::lstm {

namespace {

using Kind = DataError::Kind;

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& tok) {
    if (tok == "nan") return std::nan("");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw DataError(Kind::bad_value, "model container: bad number '" + tok + "'");
    return v;
}

template <typename T>
T expect(std::istream& in, const std::string& what) {
    T v;
    if (!(in >> v)) throw DataError(Kind::bad_value, "model container: expected " + what);
    return v;
}

void expect_key(std::istream& in, const std::string& key) {
    const auto got = expect<std::string>(in, key);
    if (got != key) throw DataError(Kind::bad_value, "model container: expected '" + key + "', found '" + got + "'");
}

}  // namespace

void write_model(std::ostream& out, const TrainedLstm& model) {
    const auto& c = model.config;
    out << "vlab-lstm " << kModelContainerVersion << '\n';
    out << "window_len " << c.window_len << '\n';
    out << "layers " << c.layer_sizes.size();
    for (auto h : c.layer_sizes) out << ' ' << h;
    out << '\n';
    out << "dropout " << num(c.dropout) << '\n';
    out << "batch_size " << c.batch_size << '\n';
    out << "epochs " << c.epochs << '\n';
    out << "learning_rate " << num(c.learning_rate) << '\n';
    out << "adam " << num(c.beta1) << ' ' << num(c.beta2) << ' ' << num(c.epsilon) << '\n';
    out << "relu_outputs " << (c.relu_outputs ? 1 : 0) << '\n';
    out << "seed " << c.seed << '\n';
    out << "target " << to_string(c.target) << '\n';
    out << "vol_window " << c.vol_window << '\n';
    out << "scaler " << num(model.scaler.min) << ' ' << num(model.scaler.max) << '\n';
    out << "loss_history " << model.train_loss.size() << '\n';
    for (std::size_t e = 0; e < model.train_loss.size(); ++e)
        out << num(model.train_loss[e]) << ' ' << num(model.val_loss.at(e)) << '\n';
    for (const auto& s : model.layout) {
        out << "tensor " << s.name << ' ' << s.rows << ' ' << s.cols << '\n';
        for (std::size_t i = 0; i < s.size(); ++i) out << num(model.weights[s.offset + i]) << '\n';
    }
    out << "end\n";
}

void save_model(const std::filesystem::path& path, const TrainedLstm& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(Kind::missing_file, "cannot write model container " + path.string());
    write_model(out, model);
}

TrainedLstm read_model(std::istream& in) {
    expect_key(in, "vlab-lstm");
    if (expect<int>(in, "version") != kModelContainerVersion)
        throw DataError(Kind::bad_value, "model container: unsupported version");

    LstmConfig c;
    expect_key(in, "window_len");
    c.window_len = expect<std::size_t>(in, "window_len");
    expect_key(in, "layers");
    c.layer_sizes.resize(expect<std::size_t>(in, "layer count"));
    for (auto& h : c.layer_sizes) h = expect<std::size_t>(in, "layer size");
    expect_key(in, "dropout");
    c.dropout = parse_double(expect<std::string>(in, "dropout"));
    expect_key(in, "batch_size");
    c.batch_size = expect<std::size_t>(in, "batch_size");
    expect_key(in, "epochs");
    c.epochs = expect<int>(in, "epochs");
    expect_key(in, "learning_rate");
    c.learning_rate = parse_double(expect<std::string>(in, "learning_rate"));
    expect_key(in, "adam");
    c.beta1 = parse_double(expect<std::string>(in, "beta1"));
    c.beta2 = parse_double(expect<std::string>(in, "beta2"));
    c.epsilon = parse_double(expect<std::string>(in, "epsilon"));
    expect_key(in, "relu_outputs");
    c.relu_outputs = expect<int>(in, "relu_outputs") != 0;
    expect_key(in, "seed");
    c.seed = expect<std::uint64_t>(in, "seed");
    expect_key(in, "target");
    c.target = parse_target(expect<std::string>(in, "target"));
    expect_key(in, "vol_window");
    c.vol_window = expect<std::size_t>(in, "vol_window");
    validate(c);

    TrainedLstm m;
    m.config = c;
    m.layout = tensor_layout(c);
    m.weights.assign(m.layout.back().offset + m.layout.back().size(), 0.0);
    expect_key(in, "scaler");
    m.scaler.min = parse_double(expect<std::string>(in, "scaler min"));
    m.scaler.max = parse_double(expect<std::string>(in, "scaler max"));
    expect_key(in, "loss_history");
    const auto epochs = expect<std::size_t>(in, "loss history length");
    for (std::size_t e = 0; e < epochs; ++e) {
        m.train_loss.push_back(parse_double(expect<std::string>(in, "train loss")));
        m.val_loss.push_back(parse_double(expect<std::string>(in, "val loss")));
    }
    for (const auto& s : m.layout) {
        expect_key(in, "tensor");
        const auto name = expect<std::string>(in, "tensor name");
        const auto rows = expect<std::size_t>(in, "rows");
        const auto cols = expect<std::size_t>(in, "cols");
        if (name != s.name || rows != s.rows || cols != s.cols)
            throw DataError(Kind::bad_value, "model container: tensor " + name + " does not match the config layout");
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double w = parse_double(expect<std::string>(in, "weight"));
            if (!std::isfinite(w)) throw DataError(Kind::bad_value, "model container: non-finite weight in " + name);
            m.weights[s.offset + i] = w;
        }
    }
    expect_key(in, "end");
    return m;
}

TrainedLstm load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(Kind::missing_file, "cannot open model container " + path.string());
    return read_model(in);
}

void write_loss_csv(std::ostream& out, const TrainedLstm& model) {
    out << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < model.train_loss.size(); ++e)
        out << e + 1 << ',' << num(model.train_loss[e]) << ',' << num(model.val_loss.at(e)) << '\n';
}

}  // namespace vlab::lstm
