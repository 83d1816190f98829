#include "idcnn/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "binary_io.hpp"

namespace idcnn {
namespace {

constexpr const char kCheckpointMagic[9] = "IDCNNCKP";
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint32_t kMaxHeaderBytes = 1u << 20;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(value, &used);
        if (used == value.size()) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw DataError("config key '" + key + "' expects a non-negative integer, got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw DataError("config key '" + key + "' expects a number, got '" + value + "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw DataError("config key '" + key + "' expects true/false, got '" + value + "'");
}

} // namespace

template <typename T>
BasicModel<T> build_model(std::size_t depth, std::size_t filters, Rng& rng) {
    require(depth >= 3, "build_model: depth must be >= 3 (head, body and tail layers)");
    require(filters >= 1, "build_model: filters must be >= 1");
    BasicModel<T> model{depth, filters, {}};
    const auto conv = [&](std::size_t out, std::size_t in) {
        nn::ConvLayer<T> layer;
        layer.params = nn::ConvParams<T>(out, in);
        nn::glorot_uniform_fill<T>(layer.params.weights, in * 9, out * 9, rng);
        model.net.add(std::move(layer));
    };
    conv(filters, 3);
    model.net.add(nn::ReluLayer{});
    for (std::size_t i = 0; i + 2 < depth; ++i) {
        conv(filters, filters);
        model.net.add(nn::BatchNormLayer<T>{nn::BatchNormParams<T>(filters), {}, {}, {}});
        model.net.add(nn::ReluLayer{});
    }
    conv(1, filters);
    model.net.add(nn::SigmoidLayer{});
    return model;
}

template <typename T>
LayerCounts count_layers(const nn::Sequential<T>& net) {
    LayerCounts counts;
    for (const auto& layer : net.layers()) {
        if (std::holds_alternative<nn::ConvLayer<T>>(layer)) ++counts.conv;
        else if (std::holds_alternative<nn::BatchNormLayer<T>>(layer)) ++counts.batchnorm;
        else if (std::holds_alternative<nn::ReluLayer>(layer)) ++counts.relu;
        else ++counts.sigmoid;
    }
    return counts;
}

template <typename T>
void validate_architecture(const BasicModel<T>& model) {
    const auto& layers = model.net.layers();
    const std::size_t d = model.depth;
    const std::size_t f = model.filters;
    const auto fail = [](const std::string& why) { throw DataError("model architecture mismatch: " + why); };
    if (d < 3 || f < 1) fail("depth must be >= 3 and filters >= 1");
    if (layers.size() != 3 * d - 2) fail("expected " + std::to_string(3 * d - 2) + " layers");
    const auto expect_conv = [&](std::size_t i, std::size_t out, std::size_t in) {
        const auto* conv = std::get_if<nn::ConvLayer<T>>(&layers[i]);
        if (!conv || conv->params.out_channels != out || conv->params.in_channels != in) {
            fail("layer " + std::to_string(i) + " should be conv(" + std::to_string(in) + "->" + std::to_string(out) + ")");
        }
    };
    const auto expect_relu = [&](std::size_t i) {
        if (!std::holds_alternative<nn::ReluLayer>(layers[i])) fail("layer " + std::to_string(i) + " should be relu");
    };
    expect_conv(0, f, 3);
    expect_relu(1);
    for (std::size_t b = 0; b + 2 < d; ++b) {
        const std::size_t i = 2 + 3 * b;
        expect_conv(i, f, f);
        const auto* bn = std::get_if<nn::BatchNormLayer<T>>(&layers[i + 1]);
        if (!bn || bn->params.channels != f) fail("layer " + std::to_string(i + 1) + " should be batchnorm");
        expect_relu(i + 2);
    }
    expect_conv(layers.size() - 2, 1, f);
    if (!std::holds_alternative<nn::SigmoidLayer>(layers.back())) fail("last layer should be sigmoid");
}

void TrainConfig::validate() const {
    require(depth >= 3, "train config: depth must be >= 3");
    require(filters >= 1, "train config: filters must be >= 1");
    require(epochs >= 1, "train config: epochs must be >= 1");
    require(lr > 0.0, "train config: learning rate must be positive");
    require(lr_decay > 0.0 && lr_decay <= 1.0, "train config: lr decay must lie in (0, 1]");
    require(batch_size >= 1, "train config: batch size must be >= 1");
    require(patch_size >= 21, "train config: patch size must be >= 21");
    if (noise.random) {
        require(0.0 <= noise.rho_min && noise.rho_min <= noise.rho_max && noise.rho_max <= 1.0,
                "train config: random noise range must satisfy 0 <= min <= max <= 1");
    } else {
        require(noise.rho >= 0.0 && noise.rho <= 1.0, "train config: rho must lie in [0, 1]");
    }
}

double learning_rate(const TrainConfig& config, std::size_t epoch) {
    return epoch <= config.decay_epoch ? config.lr : config.lr * config.lr_decay;
}

std::string format_config(const TrainConfig& c) {
    std::ostringstream out;
    out << "depth=" << c.depth << "\n"
        << "filters=" << c.filters << "\n"
        << "epochs=" << c.epochs << "\n"
        << "lr=" << format_double(c.lr) << "\n"
        << "lr_decay=" << format_double(c.lr_decay) << "\n"
        << "decay_epoch=" << c.decay_epoch << "\n"
        << "batch_size=" << c.batch_size << "\n"
        << "patch_size=" << c.patch_size << "\n"
        << "noise_model=" << to_string(c.noise.model) << "\n"
        << "rho=" << format_double(c.noise.rho) << "\n"
        << "rho_random=" << (c.noise.random ? "true" : "false") << "\n"
        << "rho_min=" << format_double(c.noise.rho_min) << "\n"
        << "rho_max=" << format_double(c.noise.rho_max) << "\n"
        << "seed=" << c.seed << "\n";
    return out.str();
}

TrainConfig parse_config(const std::string& text) {
    TrainConfig c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("config line without '=': " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "depth") c.depth = parse_size(key, value);
        else if (key == "filters") c.filters = parse_size(key, value);
        else if (key == "epochs") c.epochs = parse_size(key, value);
        else if (key == "lr") c.lr = parse_double(key, value);
        else if (key == "lr_decay") c.lr_decay = parse_double(key, value);
        else if (key == "decay_epoch") c.decay_epoch = parse_size(key, value);
        else if (key == "batch_size") c.batch_size = parse_size(key, value);
        else if (key == "patch_size") c.patch_size = parse_size(key, value);
        else if (key == "noise_model") {
            try {
                c.noise.model = parse_noise_model(value);
            } catch (const ContractError& e) {
                throw DataError(e.what());
            }
        } else if (key == "rho") c.noise.rho = parse_double(key, value);
        else if (key == "rho_random") c.noise.random = parse_bool(key, value);
        else if (key == "rho_min") c.noise.rho_min = parse_double(key, value);
        else if (key == "rho_max") c.noise.rho_max = parse_double(key, value);
        else if (key == "seed") c.seed = parse_size(key, value);
        else throw DataError("unknown config key '" + key + "'");
    }
    return c;
}

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
    using namespace detail;
    write_tag(out, kCheckpointMagic);
    write_u32(out, kCheckpointVersion);
    std::string header = "model_depth=" + std::to_string(checkpoint.model.depth) + "\n" +
                         "model_filters=" + std::to_string(checkpoint.model.filters) + "\n" +
                         "epochs_completed=" + std::to_string(checkpoint.state.epochs_completed) + "\n" +
                         format_config(checkpoint.config);
    write_u32(out, static_cast<std::uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    nn::write_layers(out, checkpoint.model.net);

    const auto& opt = checkpoint.state.optimizer;
    write_u64(out, opt.t);
    write_f64(out, opt.lr);
    write_f64(out, opt.beta1);
    write_f64(out, opt.beta2);
    write_f64(out, opt.eps);
    write_u32(out, static_cast<std::uint32_t>(opt.m.size()));
    for (std::size_t s = 0; s < opt.m.size(); ++s) {
        write_u64(out, opt.m[s].size());
        write_f32_array(out, opt.m[s]);
        write_f32_array(out, opt.v[s]);
    }
    write_u32(out, static_cast<std::uint32_t>(checkpoint.state.loss_history.size()));
    for (const double loss : checkpoint.state.loss_history) write_f64(out, loss);
}

Checkpoint read_checkpoint(std::istream& in) {
    using namespace detail;
    const char* what = "checkpoint";
    expect_tag(in, kCheckpointMagic, what);
    const auto version = read_u32(in, what);
    if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
    const auto header_len = read_u32(in, what);
    if (header_len > kMaxHeaderBytes) throw DataError("checkpoint header too large");
    std::string header(header_len, '\0');
    read_exact(in, header.data(), header_len, what);

    Checkpoint ck;
    std::string config_text;
    std::istringstream lines(header);
    std::string line;
    std::map<std::string, std::string> meta;
    while (std::getline(lines, line)) {
        const auto eq = line.find('=');
        const std::string key = eq == std::string::npos ? line : line.substr(0, eq);
        if (key == "model_depth" || key == "model_filters" || key == "epochs_completed") {
            meta[key] = line.substr(eq + 1);
        } else {
            config_text += line + "\n";
        }
    }
    for (const char* key : {"model_depth", "model_filters", "epochs_completed"}) {
        if (!meta.count(key)) throw DataError(std::string("checkpoint header lacks ") + key);
    }
    ck.model.depth = parse_size("model_depth", meta["model_depth"]);
    ck.model.filters = parse_size("model_filters", meta["model_filters"]);
    ck.state.epochs_completed = parse_size("epochs_completed", meta["epochs_completed"]);
    ck.config = parse_config(config_text);
    ck.model.net = nn::read_layers<float>(in);
    validate_architecture(ck.model);

    auto& opt = ck.state.optimizer;
    opt.t = read_u64(in, what);
    opt.lr = read_f64(in, what);
    opt.beta1 = read_f64(in, what);
    opt.beta2 = read_f64(in, what);
    opt.eps = read_f64(in, what);
    const auto slots = read_u32(in, what);
    const auto params = ck.model.net.parameters();
    if (slots != 0 && slots != params.size()) throw DataError("checkpoint optimizer state does not match the model");
    for (std::uint32_t s = 0; s < slots; ++s) {
        const auto len = read_u64(in, what);
        if (len != params[s].value.size()) throw DataError("checkpoint optimizer moment has the wrong length");
        opt.m.push_back(read_f32_array<float>(in, len, what));
        opt.v.push_back(read_f32_array<float>(in, len, what));
    }
    const auto history = read_u32(in, what);
    if (history > (1u << 24)) throw DataError("checkpoint loss history too long");
    for (std::uint32_t i = 0; i < history; ++i) ck.state.loss_history.push_back(read_f64(in, what));
    return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    // Write-then-rename so an interrupted save never leaves a torn checkpoint.
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot open '" + tmp + "' for writing");
        write_checkpoint(out, checkpoint);
        out.flush();
        if (!out) throw DataError("failed writing '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DataError("cannot move checkpoint into place at '" + path.string() + "': " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
    try {
        return read_checkpoint(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

template BasicModel<float> build_model(std::size_t, std::size_t, Rng&);
template BasicModel<double> build_model(std::size_t, std::size_t, Rng&);
template void validate_architecture(const BasicModel<float>&);
template void validate_architecture(const BasicModel<double>&);
template LayerCounts count_layers(const nn::Sequential<float>&);
template LayerCounts count_layers(const nn::Sequential<double>&);

} // namespace idcnn
