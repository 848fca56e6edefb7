#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cocycle/error.hpp"
#include "cocycle/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitSchema = 2;
constexpr int kExitResource = 3;
constexpr int kExitStrict = 4;

void report(const std::string& kind, const std::string& message, const json& extra = json::object()) {
  json j = extra;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

int exit_code(cocycle::ErrorKind kind) {
  switch (kind) {
    case cocycle::ErrorKind::validation: return kExitSchema;
    case cocycle::ErrorKind::resource: return kExitResource;
    default: return kExitOther;
  }
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

json number_from(const std::string& text, bool integer, const std::string& key) {
  try {
    std::size_t used = 0;
    json v = integer ? json(std::stoll(text, &used)) : json(std::stod(text, &used));
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw cocycle::Error(cocycle::ErrorKind::validation, "--" + key + ": cannot read '" + text + "' as a number");
}

json flag_value(const cocycle::ConfigKey& key, const std::string& text) {
  if (key.type == "string") return text;
  if (key.type == "integer") return number_from(text, true, key.name);
  if (key.type == "number") return number_from(text, false, key.name);
  if (key.type == "numbers" || key.type == "integers") {
    json arr = json::array();
    for (const auto& item : split(text)) arr.push_back(number_from(item, key.type == "integers", key.name));
    return arr;
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw cocycle::Error(cocycle::ErrorKind::validation, "--" + key.name + ": " + e.what());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cocycle::Error(cocycle::ErrorKind::validation, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cocycle::Error(cocycle::ErrorKind::resource, "cannot write " + path.string());
  out << content;
}

struct CommandFlags {
  std::vector<cocycle::ConfigKey> keys;
  std::map<std::string, std::string> text;
  std::map<std::string, bool> switches;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on Hilbert length functions, cocycles and Folner averages"};
  app.set_version_flag("--version", cocycle::kLibraryVersion);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one experiment or a batch config");
  std::string config_path;
  std::string out_dir;
  bool strict = false;
  run->add_option("--config", config_path, "JSON config; its values override flags")->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, "Directory for runs without explicit output paths");
  run->add_flag("--strict", strict, "Exit 4 when a checked property fails");
  run->require_subcommand(0, 1);
  run->fallthrough();

  std::map<std::string, CommandFlags> flags;
  for (const auto& name : cocycle::experiment_commands()) {
    auto* sub = run->add_subcommand(name);
    auto& f = flags[name];
    f.keys = cocycle::experiment_keys(name);
    for (const auto& key : f.keys) {
      if (key.name == "strict") continue;
      if (key.type == "boolean")
        sub->add_flag("--" + key.name, f.switches[key.name]);
      else
        sub->add_option("--" + key.name, f.text[key.name], key.type);
    }
  }

  app.add_subcommand("list", "List experiment commands")->callback([] {
    for (const auto& name : cocycle::experiment_commands()) std::cout << name << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("validation", e.what());
    return kExitSchema;
  }
  if (!run->parsed()) return 0;

  try {
    std::string text;
    fs::path base = fs::current_path();
    const auto chosen = run->get_subcommands();
    if (chosen.empty()) {
      if (config_path.empty())
        throw cocycle::Error(cocycle::ErrorKind::validation, "run needs a command or --config");
      text = read_file(config_path);
      base = fs::absolute(config_path).parent_path();
    } else {
      const std::string command = chosen.front()->get_name();
      auto& f = flags[command];
      json cfg = {{"command", command}};
      for (const auto& key : f.keys) {
        auto* opt = chosen.front()->get_option_no_throw("--" + key.name);
        if (!opt || opt->count() == 0) continue;
        cfg[key.name] = key.type == "boolean" ? json(f.switches[key.name]) : flag_value(key, f.text[key.name]);
      }
      if (!config_path.empty()) {
        json file;
        try {
          file = json::parse(read_file(config_path));
        } catch (const json::exception& e) {
          throw cocycle::Error(cocycle::ErrorKind::validation, std::string("config is not valid JSON: ") + e.what());
        }
        if (!file.is_object() || file.contains("runs"))
          throw cocycle::Error(cocycle::ErrorKind::validation, "a batch config cannot be combined with a command");
        if (file.contains("command") && file["command"] != command)
          throw cocycle::Error(cocycle::ErrorKind::validation, "config command differs from " + command);
        cfg.update(file);
        base = fs::absolute(config_path).parent_path();
      }
      text = cfg.dump();
    }

    const auto outcomes = cocycle::run_batch(text, base);
    std::vector<std::string> violations;
    for (const auto& o : outcomes) {
      bool wrote = false;
      if (!o.output_path.empty()) {
        write_file(o.output_path, o.csv);
        wrote = true;
      }
      if (!o.summary_path.empty()) write_file(o.summary_path, o.summary);
      if (!out_dir.empty()) {
        if (o.output_path.empty()) write_file(fs::path(out_dir) / (o.name + ".csv"), o.csv);
        if (o.summary_path.empty()) write_file(fs::path(out_dir) / (o.name + ".summary.json"), o.summary);
        wrote = true;
      }
      if (!wrote) std::cout << o.csv;
      for (const auto& v : o.violations) violations.push_back(o.name + ": " + v);
    }
    for (const auto& v : violations) std::cerr << "warning: " << v << '\n';
    if (strict && !violations.empty()) {
      report("strict", "property violations", {{"violations", violations}});
      return kExitStrict;
    }
    return 0;
  } catch (const cocycle::Error& e) {
    report(std::string(cocycle::to_string(e.kind())), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report("internal", e.what());
    return kExitOther;
  }
}
