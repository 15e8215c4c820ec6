#include "brwsim/io.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "brwsim/errors.hpp"

namespace brw {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.precision(17);
  return out;
}

} // namespace

void write_jsa(const JointSpectralAmplitude& jsa, const std::filesystem::path& path) {
  auto out = open_out(path);
  const int n_s = static_cast<int>(jsa.omega_s.size());
  const int n_i = static_cast<int>(jsa.omega_i.size());
  out << "# brwsim jsa v1\n";
  out << "# layout: header, signal detunings (rad/s, one per line), idler detunings,\n";
  out << "#         Re(Phi) rows (n_i values per line), Im(Phi) rows\n";
  out << "omega_s0_rad_s " << jsa.omega_s0 << "\n";
  out << "omega_i0_rad_s " << jsa.omega_i0 << "\n";
  out << "n_s " << n_s << "\n";
  out << "n_i " << n_i << "\n";
  for (int k = 0; k < n_s; ++k) out << jsa.omega_s[k] << "\n";
  for (int l = 0; l < n_i; ++l) out << jsa.omega_i[l] << "\n";
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = 0; k < n_s; ++k) {
      for (int l = 0; l < n_i; ++l) {
        const auto& z = jsa.amplitude(k, l);
        out << (pass == 0 ? z.real() : z.imag());
        out << (l + 1 == n_i ? '\n' : '\t');
      }
    }
  }
}

JointSpectralAmplitude read_jsa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open JSA file '" + path.string() + "'");
  std::string line;
  JointSpectralAmplitude jsa;
  int n_s = -1, n_i = -1;
  // header
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string key;
    is >> key;
    if (key == "omega_s0_rad_s") is >> jsa.omega_s0;
    else if (key == "omega_i0_rad_s") is >> jsa.omega_i0;
    else if (key == "n_s") is >> n_s;
    else if (key == "n_i") {
      is >> n_i;
      break;
    } else {
      throw ParseError("JSA file '" + path.string() + "': unexpected header line '" + line + "'");
    }
  }
  if (n_s < 1 || n_i < 1) throw ParseError("JSA file '" + path.string() + "': missing dimensions");

  jsa.omega_s.resize(n_s);
  jsa.omega_i.resize(n_i);
  for (int k = 0; k < n_s; ++k)
    if (!(in >> jsa.omega_s[k])) throw ParseError("JSA file: truncated signal axis");
  for (int l = 0; l < n_i; ++l)
    if (!(in >> jsa.omega_i[l])) throw ParseError("JSA file: truncated idler axis");
  Eigen::MatrixXd re(n_s, n_i), im(n_s, n_i);
  for (int k = 0; k < n_s; ++k)
    for (int l = 0; l < n_i; ++l)
      if (!(in >> re(k, l))) throw ParseError("JSA file: truncated real plane");
  for (int k = 0; k < n_s; ++k)
    for (int l = 0; l < n_i; ++l)
      if (!(in >> im(k, l))) throw ParseError("JSA file: truncated imaginary plane");
  jsa.amplitude = re.cast<std::complex<double>>() +
                  std::complex<double>(0.0, 1.0) * im.cast<std::complex<double>>();
  return jsa;
}

void write_sweep_table(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "pump_fwhm_nm\tK\tE_bits\trho\tsignal_fwhm_nm\tidler_fwhm_nm\n";
  for (const auto& r : rows) {
    out << r.pump_fwhm_nm << '\t' << r.schmidt_number << '\t' << r.entropy_bits << '\t'
        << r.rho << '\t' << r.signal_fwhm_nm << '\t' << r.idler_fwhm_nm << '\n';
  }
}

void write_schmidt_spectrum(const Eigen::VectorXd& lambdas, const std::filesystem::path& path,
                            int max_rows) {
  auto out = open_out(path);
  out << "n\tlambda_n\n";
  const int n = std::min<int>(max_rows, static_cast<int>(lambdas.size()));
  for (int i = 0; i < n; ++i) out << i << '\t' << lambdas[i] << '\n';
}

void write_mode_profile(const GuidedMode& mode, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# " << to_string(mode.pol) << " " << to_string(mode.mode_class)
      << " mode, n_eff = " << mode.n_eff << ", lambda = " << mode.lambda_nm << " nm\n";
  out << "x_um\tu_per_sqrt_um\n";
  for (int k = 0; k < mode.grid.n; ++k)
    out << mode.grid.x(k) << '\t' << mode.profile[k] << '\n';
}

void write_ga_log(const std::vector<GenerationStats>& log, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "generation\tbest_fitness\tmean_fitness";
  for (const char* name : kGeneNames) out << "\tbest_" << name;
  out << "\n";
  for (const auto& s : log) {
    out << s.generation << '\t' << s.best_fitness << '\t' << s.mean_fitness;
    for (double g : s.best_genes) out << '\t' << g;
    out << '\n';
  }
}

std::string file_hash_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot hash '" + path.string() + "'");
  std::uint64_t h = 14695981039346656037ULL;
  char buffer[65536];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buffer[i]);
      h *= 1099511628211ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["version"] = manifest.version;
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  j["timestamp"] = stamp;
  j["inputs"] = nlohmann::json::array();
  for (const auto& [path, hash] : manifest.inputs)
    j["inputs"].push_back({{"path", path}, {"fnv1a64", hash}});
  if (!manifest.config_json.empty())
    j["config"] = nlohmann::json::parse(manifest.config_json);
  j["outputs"] = manifest.outputs;

  auto out = open_out(out_dir / "manifest.json");
  out << j.dump(2) << "\n";
}

} // namespace brw
