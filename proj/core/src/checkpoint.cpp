#include "pvsc/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace pvsc {

namespace {

using nlohmann::json;

void write_doubles(std::ofstream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* data, std::size_t count,
                  const std::string& path) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw CheckpointError(path + ": truncated checkpoint");
}

}  // namespace

void write_checkpoint(const std::string& path, const ValueField& value,
                      const PolicyField& policy, std::uint64_t config_hash) {
  const SolverGrid& g = value.grid;
  json header;
  header["format"] = "pvsc-field";
  header["version"] = 1;
  header["config_hash"] = config_hash;
  header["n_t"] = g.n_t;
  header["n_p"] = g.n_p;
  header["n_s"] = g.n_s;
  header["time_step"] = g.time_step;
  header["p_min"] = g.p_min;
  header["p_max"] = g.p_max;
  header["p_step"] = g.p_step;
  header["s_min"] = g.s_min;
  header["s_step"] = g.s_step;
  header["arrays"] = {"value", "charge_fraction", "discharge_mw", "regime"};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError(path + ": cannot open for writing");
  out << header.dump() << '\n';

  const std::size_t nodes = value.values.size();
  write_doubles(out, value.values.data(), nodes);
  std::vector<double> scratch(nodes);
  for (std::size_t i = 0; i < nodes; ++i) scratch[i] = policy.actions[i].charge_fraction;
  write_doubles(out, scratch.data(), nodes);
  for (std::size_t i = 0; i < nodes; ++i) scratch[i] = policy.actions[i].discharge_mw;
  write_doubles(out, scratch.data(), nodes);
  std::vector<char> regimes(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    regimes[i] = static_cast<char>(policy.regimes[i]);
  }
  out.write(regimes.data(), static_cast<std::streamsize>(nodes));
  if (!out) throw CheckpointError(path + ": write failed");
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(path + ": cannot open");
  std::string header_line;
  if (!std::getline(in, header_line)) throw CheckpointError(path + ": missing header");

  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw CheckpointError(path + ": bad header: " + e.what());
  }
  if (header.value("format", "") != "pvsc-field" || header.value("version", 0) != 1) {
    throw CheckpointError(path + ": unsupported checkpoint format");
  }

  Checkpoint cp;
  SolverGrid g;
  g.n_t = header.at("n_t").get<int>();
  g.n_p = header.at("n_p").get<int>();
  g.n_s = header.at("n_s").get<int>();
  g.time_step = header.at("time_step").get<double>();
  g.p_min = header.at("p_min").get<double>();
  g.p_max = header.at("p_max").get<double>();
  g.p_step = header.at("p_step").get<double>();
  g.s_min = header.at("s_min").get<double>();
  g.s_step = header.at("s_step").get<double>();
  cp.config_hash = header.at("config_hash").get<std::uint64_t>();
  if (g.n_t < 2 || g.n_p < 2 || g.n_s < 2) {
    throw CheckpointError(path + ": bad dimensions in header");
  }

  const std::size_t nodes =
      static_cast<std::size_t>(g.n_t) * g.n_p * g.n_s;
  cp.value.grid = g;
  cp.value.values.resize(nodes);
  read_doubles(in, cp.value.values.data(), nodes, path);

  cp.policy.grid = g;
  cp.policy.actions.resize(nodes);
  std::vector<double> scratch(nodes);
  read_doubles(in, scratch.data(), nodes, path);
  for (std::size_t i = 0; i < nodes; ++i) cp.policy.actions[i].charge_fraction = scratch[i];
  read_doubles(in, scratch.data(), nodes, path);
  for (std::size_t i = 0; i < nodes; ++i) cp.policy.actions[i].discharge_mw = scratch[i];
  std::vector<char> regimes(nodes);
  in.read(regimes.data(), static_cast<std::streamsize>(nodes));
  if (!in) throw CheckpointError(path + ": truncated checkpoint");
  cp.policy.regimes.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    cp.policy.regimes[i] = static_cast<Regime>(regimes[i]);
  }
  return cp;
}

}  // namespace pvsc
