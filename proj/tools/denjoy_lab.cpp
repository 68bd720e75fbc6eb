#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "denjoy/circle_core.hpp"
#include "denjoy/config.hpp"

namespace {

void usage(std::ostream& out) {
    out << "usage: denjoy-lab <command> --config <path> [--out <dir>] [--seed <int>]\n"
        << "commands: construct verify path-search distortion rotnum report\n";
}

long parse_seed(const std::string& text) {
    const char* c = text.c_str();
    char* end = nullptr;
    long v = std::strtol(c, &end, 10);
    if (end == c || *end != '\0')
        throw std::invalid_argument("--seed: malformed integer '" + text + "'");
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        if (argc < 2) {
            usage(std::cerr);
            return 2;
        }
        std::string command = argv[1];
        if (command == "--help" || command == "-h") {
            usage(std::cout);
            return 0;
        }
        std::string config_path, out_dir, seed_text;
        for (int i = 2; i < argc; ++i) {
            std::string arg = argv[i];
            auto next = [&]() -> std::string {
                if (i + 1 >= argc) throw std::invalid_argument(arg + ": missing argument");
                return argv[++i];
            };
            if (arg == "--config")
                config_path = next();
            else if (arg == "--out")
                out_dir = next();
            else if (arg == "--seed")
                seed_text = next();
            else
                throw std::invalid_argument("unknown option '" + arg + "'");
        }
        if (config_path.empty()) throw std::invalid_argument("--config is required");
        std::ifstream in(config_path);
        if (!in) throw std::invalid_argument("cannot open config file '" + config_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();

        denjoy::RunConfig cfg = denjoy::parse_config(buf.str());
        if (!cfg.command.empty() && cfg.command != command)
            throw std::invalid_argument("config names command '" + cfg.command +
                                        "' but the command line says '" + command + "'");
        cfg.command = command;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!seed_text.empty()) cfg.seed = parse_seed(seed_text);
        return denjoy::run_command(cfg);
    } catch (const denjoy::internal_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
