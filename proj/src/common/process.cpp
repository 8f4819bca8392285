#include "blocktrace/process.hpp"

#include "blocktrace/error.hpp"

#include <array>
#include <cerrno>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace blocktrace {

namespace {

struct Pipe {
    int fds[2]{-1, -1};
    Pipe() {
        if (::pipe2(fds, O_CLOEXEC) != 0) {
            throw Error(std::string("pipe: ") + std::strerror(errno));
        }
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
};

std::vector<std::string> merged_environment(const std::map<std::string, std::string>& extra) {
    std::vector<std::string> env;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        std::string entry(*e);
        auto eq = entry.find('=');
        if (eq != std::string::npos && extra.count(entry.substr(0, eq)) != 0) continue;
        env.push_back(std::move(entry));
    }
    for (const auto& [k, v] : extra) env.push_back(k + "=" + v);
    return env;
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options) {
    if (argv.empty()) throw Error("run_process: empty argv");

    Pipe in, out, err;
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in.fds[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out.fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err.fds[1], STDERR_FILENO);
    std::string cwd = options.cwd.string();
    if (!cwd.empty()) posix_spawn_file_actions_addchdir_np(&actions, cwd.c_str());

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    auto env_strings = merged_environment(options.env);
    std::vector<char*> envp;
    for (auto& e : env_strings) envp.push_back(e.data());
    envp.push_back(nullptr);

    pid_t pid = 0;
    int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), envp.data());
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) {
        throw Error("cannot spawn '" + argv[0] + "': " + std::strerror(rc));
    }
    in.close_read();
    out.close_write();
    err.close_write();

    // A child that exits early must not kill us with SIGPIPE while we feed stdin.
    static std::once_flag sigpipe_once;
    std::call_once(sigpipe_once, [] { ::signal(SIGPIPE, SIG_IGN); });

    ProcessResult result;
    std::size_t written = 0;
    if (options.input.empty()) in.close_write();
    std::array<char, 65536> buffer{};
    while (out.fds[0] >= 0 || err.fds[0] >= 0) {
        std::array<pollfd, 3> pfds{};
        nfds_t n = 0;
        int out_slot = -1, err_slot = -1, in_slot = -1;
        if (out.fds[0] >= 0) {
            out_slot = static_cast<int>(n);
            pfds[n++] = {out.fds[0], POLLIN, 0};
        }
        if (err.fds[0] >= 0) {
            err_slot = static_cast<int>(n);
            pfds[n++] = {err.fds[0], POLLIN, 0};
        }
        if (in.fds[1] >= 0) {
            in_slot = static_cast<int>(n);
            pfds[n++] = {in.fds[1], POLLOUT, 0};
        }
        if (::poll(pfds.data(), n, -1) < 0) {
            if (errno == EINTR) continue;
            break;
        }
        auto drain = [&](int slot, Pipe& p, std::string& sink) {
            if (slot < 0 || pfds[slot].revents == 0) return;
            ssize_t got = ::read(p.fds[0], buffer.data(), buffer.size());
            if (got > 0) {
                sink.append(buffer.data(), static_cast<std::size_t>(got));
            } else if (got == 0 || (errno != EINTR && errno != EAGAIN)) {
                p.close_read();
            }
        };
        drain(out_slot, out, result.out);
        drain(err_slot, err, result.err);
        if (in_slot >= 0 && pfds[in_slot].revents != 0) {
            if ((pfds[in_slot].revents & (POLLERR | POLLHUP)) != 0) {
                in.close_write();
            } else {
                ssize_t put = ::write(in.fds[1], options.input.data() + written,
                                      options.input.size() - written);
                if (put > 0) written += static_cast<std::size_t>(put);
                if (put < 0 && errno != EINTR && errno != EAGAIN) in.close_write();
                if (written >= options.input.size()) in.close_write();
            }
        }
    }
    in.close_write();

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

}  // namespace blocktrace
