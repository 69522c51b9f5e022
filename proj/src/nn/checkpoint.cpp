#include <fstream>

#include "amlgnn/config.hpp"
#include "amlgnn/error.hpp"
#include "amlgnn/model.hpp"
#include "../binary_io.hpp"

namespace amlgnn {

namespace {
constexpr char kMagic[8] = {'A', 'M', 'L', 'C', 'K', 'P', 'T', '1'};
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const AdamState* optimizer, std::int64_t epochs_completed) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::BadCache, "cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  detail::write_pod<std::uint8_t>(out, kCheckpointVersion);
  detail::write_string(out, to_json(model.config()).dump());
  detail::write_pod<std::uint64_t>(out, model.input_dim());
  detail::write_pod<std::int64_t>(out, epochs_completed);
  const auto params = model.named_parameters();
  detail::write_pod<std::uint64_t>(out, params.size());
  for (const auto& p : params) {
    detail::write_string(out, p.name);
    detail::write_pod<std::uint64_t>(out, p.tensor.rows());
    detail::write_pod<std::uint64_t>(out, p.tensor.cols());
    std::vector<double> buf(p.tensor.value().begin(), p.tensor.value().end());
    detail::write_array(out, buf);
  }
  detail::write_pod<std::uint8_t>(out, optimizer ? 1 : 0);
  if (optimizer) {
    detail::write_pod<std::int64_t>(out, optimizer->step);
    detail::write_pod<std::uint64_t>(out, optimizer->m.size());
    for (std::size_t k = 0; k < optimizer->m.size(); ++k) {
      detail::write_array(out, optimizer->m[k]);
      detail::write_array(out, optimizer->v[k]);
    }
  }
  if (!out) throw Error(ErrorKind::BadCache, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::BadCache, "cannot open " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw Error(ErrorKind::BadCache, path.string() + " is not a model checkpoint");
  }
  const auto version = detail::read_pod<std::uint8_t>(in);
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::BadCache, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto config = model_config_from_json(Json::parse(detail::read_string(in)));
  const auto input_dim = detail::read_pod<std::uint64_t>(in);
  Checkpoint ckpt;
  ckpt.epochs_completed = detail::read_pod<std::int64_t>(in);
  ckpt.model = build_model(config, input_dim, false);
  auto params = ckpt.model.named_parameters();
  const auto count = detail::read_pod<std::uint64_t>(in);
  if (count != params.size()) throw Error(ErrorKind::BadCache, "parameter count mismatch");
  for (auto& p : params) {
    const auto name = detail::read_string(in);
    const auto rows = detail::read_pod<std::uint64_t>(in);
    const auto cols = detail::read_pod<std::uint64_t>(in);
    const auto values = detail::read_array<double>(in);
    if (name != p.name || rows != p.tensor.rows() || cols != p.tensor.cols() ||
        values.size() != p.tensor.size()) {
      throw Error(ErrorKind::BadCache, "parameter '" + name + "' does not match the model layout");
    }
    std::copy(values.begin(), values.end(), p.tensor.value().begin());
  }
  if (detail::read_pod<std::uint8_t>(in)) {
    AdamState state;
    state.step = detail::read_pod<std::int64_t>(in);
    const auto n = detail::read_pod<std::uint64_t>(in);
    if (n != params.size()) throw Error(ErrorKind::BadCache, "optimizer state size mismatch");
    for (std::uint64_t k = 0; k < n; ++k) {
      state.m.push_back(detail::read_array<double>(in));
      state.v.push_back(detail::read_array<double>(in));
    }
    ckpt.optimizer = std::move(state);
  }
  return ckpt;
}

}  // namespace amlgnn
