#include "addax/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "addax/errors.hpp"

namespace addax {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line,
                       const std::string& message) {
  throw config_error(origin + ":" + std::to_string(line) + ": " + message);
}

double to_double(const std::string& origin, std::size_t line,
                 const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return v;
  } catch (const std::exception&) {
    fail(origin, line, "value of '" + key + "' is not a number: " + value);
  }
}

long long to_int(const std::string& origin, std::size_t line,
                 const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return v;
  } catch (const std::exception&) {
    fail(origin, line, "value of '" + key + "' is not an integer: " + value);
  }
}

std::vector<std::string> split(const std::string& value, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, sep)) {
    part = trim(part);
    if (!part.empty()) {
      parts.push_back(part);
    }
  }
  return parts;
}

}  // namespace

void apply_optimizer_override(OptimizerConfig& config, const std::string& key,
                              const std::string& value) {
  const std::string origin = "<override>";
  if (key == "method") {
    const auto m = parse_method(value);
    if (!m) {
      throw config_error("unknown method: " + value);
    }
    config.method = *m;
  } else if (key == "eta") {
    config.eta = to_double(origin, 0, key, value);
  } else if (key == "epsilon") {
    config.epsilon = to_double(origin, 0, key, value);
  } else if (key == "alpha") {
    config.alpha = to_double(origin, 0, key, value);
  } else if (key == "k0") {
    config.k0 = static_cast<std::size_t>(to_int(origin, 0, key, value));
  } else if (key == "k1") {
    config.k1 = static_cast<std::size_t>(to_int(origin, 0, key, value));
  } else if (key == "l_t") {
    config.l_t = static_cast<int>(to_int(origin, 0, key, value));
  } else if (key == "steps") {
    config.steps = static_cast<std::size_t>(to_int(origin, 0, key, value));
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(to_int(origin, 0, key, value));
  } else if (key == "record_every") {
    config.record_every = static_cast<std::size_t>(to_int(origin, 0, key, value));
  } else {
    throw config_error("unknown optimizer key '" + key + "'");
  }
}

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  RunConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        fail(origin, line_no, "malformed section header: " + raw);
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "optimizer" && section != "run" &&
          section != "compare") {
        fail(origin, line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(origin, line_no, "expected 'key = value': " + raw);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      fail(origin, line_no, "expected 'key = value': " + raw);
    }

    if (section == "problem") {
      auto& p = config.problem;
      if (key == "kind") {
        if (value != "quadratic" && value != "logistic" && value != "mlp") {
          fail(origin, line_no, "unknown problem kind: " + value);
        }
        p.kind = value;
      } else if (key == "dim") {
        p.dim = static_cast<std::size_t>(to_int(origin, line_no, key, value));
      } else if (key == "layers") {
        p.layers.clear();
        for (const auto& part : split(value, ',')) {
          p.layers.push_back(
              static_cast<std::size_t>(to_int(origin, line_no, key, part)));
        }
      } else if (key == "mu") {
        p.mu = to_double(origin, line_no, key, value);
      } else if (key == "l_lip") {
        p.l_lip = to_double(origin, line_no, key, value);
      } else if (key == "sigma") {
        p.sigma = to_double(origin, line_no, key, value);
      } else if (key == "ridge") {
        p.ridge = to_double(origin, line_no, key, value);
      } else if (key == "noise") {
        p.noise = to_double(origin, line_no, key, value);
      } else if (key == "dataset_size") {
        p.dataset_size =
            static_cast<std::size_t>(to_int(origin, line_no, key, value));
      } else if (key == "len_p") {
        p.len_p = to_double(origin, line_no, key, value);
      } else if (key == "len_cap") {
        p.len_cap = static_cast<int>(to_int(origin, line_no, key, value));
      } else if (key == "init_radius") {
        p.init_radius = to_double(origin, line_no, key, value);
      } else if (key == "init_scale") {
        p.init_scale = to_double(origin, line_no, key, value);
      } else if (key == "data_seed") {
        p.data_seed =
            static_cast<std::uint64_t>(to_int(origin, line_no, key, value));
      } else {
        fail(origin, line_no, "unknown key '" + key + "' in section [problem]");
      }
    } else if (section == "optimizer") {
      try {
        apply_optimizer_override(config.optimizer, key, value);
      } catch (const config_error& err) {
        fail(origin, line_no, err.what());
      }
    } else if (section == "run") {
      if (key == "seeds") {
        config.seeds.clear();
        for (const auto& part : split(value, ',')) {
          config.seeds.push_back(
              static_cast<std::uint64_t>(to_int(origin, line_no, key, part)));
        }
      } else if (key == "out") {
        config.out_dir = value;
      } else if (key == "record_every") {
        config.optimizer.record_every =
            static_cast<std::size_t>(to_int(origin, line_no, key, value));
      } else if (key == "stats_bins") {
        config.stats_bins =
            static_cast<std::size_t>(to_int(origin, line_no, key, value));
      } else {
        fail(origin, line_no, "unknown key '" + key + "' in section [run]");
      }
    } else if (section == "compare") {
      if (key == "methods") {
        config.compare_methods.clear();
        for (const auto& part : split(value, ',')) {
          const auto m = parse_method(part);
          if (!m) {
            fail(origin, line_no, "unknown method: " + part);
          }
          config.compare_methods.push_back(*m);
        }
      } else if (key == "threshold_frac") {
        config.threshold_frac = to_double(origin, line_no, key, value);
      } else if (const auto dotpos = key.find('.');
                 dotpos != std::string::npos) {
        // per-method override, e.g. "mezo.eta = 1e-3"
        const std::string method = key.substr(0, dotpos);
        const std::string field = key.substr(dotpos + 1);
        if (!parse_method(method)) {
          fail(origin, line_no, "unknown method '" + method + "' in override");
        }
        config.method_overrides[method].emplace_back(field, value);
      } else {
        fail(origin, line_no, "unknown key '" + key + "' in section [compare]");
      }
    } else {
      fail(origin, line_no, "key outside of any section: " + raw);
    }
  }
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw config_error("cannot open config file: " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

std::unique_ptr<Problem> make_problem(const ProblemSpec& spec) {
  LengthDistribution lengths{spec.len_p, spec.len_cap};
  if (spec.kind == "quadratic") {
    QuadraticSpec q;
    q.dim = spec.dim;
    q.layer_dims_override = spec.layers;
    q.mu = spec.mu;
    q.l_lip = spec.l_lip;
    q.sigma = spec.sigma;
    q.n_points = spec.dataset_size;
    q.init_radius = spec.init_radius;
    q.lengths = lengths;
    q.data_seed = spec.data_seed;
    return make_quadratic(q);
  }
  if (spec.kind == "logistic") {
    LogisticSpec l;
    l.dim = spec.dim;
    l.ridge = spec.ridge;
    l.n_points = spec.dataset_size;
    l.init_scale = spec.init_scale;
    l.lengths = lengths;
    l.data_seed = spec.data_seed;
    return make_logistic(l);
  }
  if (spec.kind == "mlp") {
    MlpSpec m;
    if (!spec.layers.empty()) {
      m.widths = spec.layers;
    }
    m.noise = spec.noise;
    m.n_points = spec.dataset_size;
    m.init_scale = spec.init_scale;
    m.lengths = lengths;
    m.data_seed = spec.data_seed;
    return make_mlp(m);
  }
  throw config_error("unknown problem kind: " + spec.kind);
}

}  // namespace addax
