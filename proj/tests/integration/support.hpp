#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace itest {

namespace fs = std::filesystem;
using nlohmann::json;

inline const std::string cli = EVATRAP_CLI;
inline const std::string serve = EVATRAP_SERVE;
inline const std::string data_dir = EVATRAP_DATA_DIR;
inline const std::string config_dir = EVATRAP_CONFIG_DIR;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag = "it") {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("evatrap_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

struct RunResult {
    int code = -1;
    std::string out, err;
};

namespace detail {
inline std::string drain(int fd) {
    std::string s;
    char buf[65536];
    ssize_t n;
    while ((n = ::read(fd, buf, sizeof buf)) > 0) s.append(buf, static_cast<std::size_t>(n));
    return s;
}
}  // namespace detail

// Runs a program without a shell. stderr goes to a file so large stdout
// cannot deadlock against it.
inline RunResult run(const std::vector<std::string>& args, const fs::path& cwd = fs::current_path()) {
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    int out_pipe[2];
    if (::pipe(out_pipe) != 0) return {};
    char err_name[] = "/tmp/evatrap_stderr_XXXXXX";
    const int err_fd = ::mkstemp(err_name);

    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, out_pipe[1], 1);
    posix_spawn_file_actions_adddup2(&fa, err_fd, 2);
    posix_spawn_file_actions_addclose(&fa, out_pipe[0]);
    const fs::path old = fs::current_path();
    fs::current_path(cwd);
    pid_t pid;
    const int rc = posix_spawn(&pid, argv[0], &fa, nullptr, argv.data(), environ);
    fs::current_path(old);
    posix_spawn_file_actions_destroy(&fa);
    ::close(out_pipe[1]);

    RunResult r;
    if (rc != 0) {
        ::close(out_pipe[0]);
        ::close(err_fd);
        ::unlink(err_name);
        return r;
    }
    r.out = detail::drain(out_pipe[0]);
    ::close(out_pipe[0]);
    int status = 0;
    ::waitpid(pid, &status, 0);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    ::close(err_fd);
    r.err = slurp(err_name);
    ::unlink(err_name);
    return r;
}

// A background server; reads the "listening on http://host:port" line.
struct Server {
    pid_t pid = -1;
    int port = -1;
    explicit Server(std::vector<std::string> extra = {}) {
        std::vector<std::string> args{serve, "--port", "0", "--data-dir", data_dir};
        args.insert(args.end(), extra.begin(), extra.end());
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        argv.push_back(nullptr);
        int p[2];
        if (::pipe(p) != 0) return;
        posix_spawn_file_actions_t fa;
        posix_spawn_file_actions_init(&fa);
        posix_spawn_file_actions_adddup2(&fa, p[1], 1);
        posix_spawn_file_actions_addclose(&fa, p[0]);
        if (posix_spawn(&pid, argv[0], &fa, nullptr, argv.data(), environ) != 0) pid = -1;
        posix_spawn_file_actions_destroy(&fa);
        ::close(p[1]);
        std::string line;
        char c;
        while (::read(p[0], &c, 1) == 1 && c != '\n') line += c;
        ::close(p[0]);
        const auto colon = line.rfind(':');
        if (line.rfind("listening on", 0) == 0 && colon != std::string::npos) port = std::stoi(line.substr(colon + 1));
    }
    ~Server() {
        if (pid > 0) {
            ::kill(pid, SIGTERM);
            int status;
            ::waitpid(pid, &status, 0);
        }
    }
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;
};

// A 1D line through a 250 nm SiO2 fiber: red pair along x-polarization, blue
// along y, ground state and optionally the 6P3/2 F'=5 level.
inline json line_config(int points = 200, bool excited = false) {
    json d = json::parse(R"({
      "atom": {"data": "cesium.json", "state": {"n": 6, "l": 0, "j": 0.5, "f": 4}},
      "beams": [
        {"name": "red", "wavelength_nm": 1064, "power_mW": 2.2, "max_power_mW": 10, "pair": true,
         "nanofiber": {"radius_nm": 250, "core_material": "sio2", "polarization_deg": 0}},
        {"name": "blue", "wavelength_nm": 780, "power_mW": 25, "max_power_mW": 100,
         "nanofiber": {"radius_nm": 250, "core_material": "sio2", "polarization_deg": 90}}
      ],
      "surfaces": [{"type": "cylinder", "radius_nm": 250, "material": "sio2"}],
      "geometry": {"x_nm": {"min": 240, "max": 1240}, "y_nm": 0, "z_nm": 0},
      "analysis": {"axis": "x"}
    })");
    d["geometry"]["x_nm"]["n"] = points;
    if (excited)
        d["levels"] = json::parse(R"([{"n": 6, "l": 0, "j": 0.5, "f": 4}, {"n": 6, "l": 1, "j": 1.5, "f": 5}])");
    return d;
}

}  // namespace itest
