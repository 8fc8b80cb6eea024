#include "qadv/wire/session.hpp"

#include "qadv/errors.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>

namespace qadv::wire {

namespace {

// one small frame per round trip: without this, Nagle plus delayed ACKs
// stall every exchange by tens of milliseconds
void no_delay(int fd) {
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

constexpr std::size_t kMaxLine = std::size_t{1} << 24;

std::string sys_error(const std::string& what) { return what + ": " + std::strerror(errno); }

}  // namespace

FdChannel::FdChannel(int in_fd, int out_fd, int timeout_ms, bool owns)
    : in_(in_fd), out_(out_fd), timeout_ms_(timeout_ms), owns_(owns) {}

FdChannel::~FdChannel() {
    if (!owns_) return;
    if (in_ >= 0) ::close(in_);
    if (out_ >= 0 && out_ != in_) ::close(out_);
}

void FdChannel::close_output() {
    if (out_ < 0) return;
    if (owns_ && out_ != in_) ::close(out_);
    else if (out_ == in_) ::shutdown(out_, SHUT_WR);
    out_ = -1;
}

void FdChannel::send(const std::string& line) {
    if (out_ < 0) throw TransportError("channel output is closed");
    std::size_t done = 0;
    while (done < line.size()) {
        const ssize_t w = ::write(out_, line.data() + done, line.size() - done);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw TransportError(sys_error("write failed"));
        }
        done += static_cast<std::size_t>(w);
    }
}

std::string FdChannel::receive() {
    for (;;) {
        const auto nl = buf_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buf_.substr(0, nl + 1);
            buf_.erase(0, nl + 1);
            return line;
        }
        if (buf_.size() > kMaxLine) throw TransportError("line exceeds 16 MiB");
        pollfd p{in_, POLLIN, 0};
        const int rc = ::poll(&p, 1, timeout_ms_);
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw TransportError(sys_error("poll failed"));
        }
        if (rc == 0) throw TransportError("timed out waiting for the peer");
        char chunk[65536];
        const ssize_t r = ::read(in_, chunk, sizeof chunk);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw TransportError(sys_error("read failed"));
        }
        if (r == 0) throw TransportError(buf_.empty() ? "peer closed the connection" : "peer closed mid-line");
        buf_.append(chunk, static_cast<std::size_t>(r));
    }
}

std::unique_ptr<FdChannel> stdio_channel(int timeout_ms) {
    return std::make_unique<FdChannel>(STDIN_FILENO, STDOUT_FILENO, timeout_ms, false);
}

SpawnedChannel::SpawnedChannel(const std::string& command, int timeout_ms) : FdChannel(-1, -1, timeout_ms, true) {
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0) throw TransportError(sys_error("pipe failed"));
    if (::pipe(from_child) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw TransportError(sys_error("pipe failed"));
    }
    std::fflush(nullptr);
    pid_ = ::fork();
    if (pid_ < 0) throw TransportError(sys_error("fork failed"));
    if (pid_ == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_ = from_child[0];
    out_ = to_child[1];
}

SpawnedChannel::~SpawnedChannel() {
    try {
        wait();
    } catch (...) {
    }
}

int SpawnedChannel::wait() {
    if (pid_ < 0) return status_;
    close_output();
    int st = 0;
    while (::waitpid(pid_, &st, 0) < 0 && errno == EINTR) {
    }
    pid_ = -1;
    status_ = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + (WIFSIGNALED(st) ? WTERMSIG(st) : 0);
    return status_;
}

std::unique_ptr<FdChannel> tcp_accept(std::uint16_t port, int timeout_ms,
                                      const std::function<void(std::uint16_t)>& on_bound) {
    const int s = ::socket(AF_INET, SOCK_STREAM, 0);
    if (s < 0) throw TransportError(sys_error("socket failed"));
    const int one = 1;
    ::setsockopt(s, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(s, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(s, 1) != 0) {
        const auto msg = sys_error("cannot listen on port " + std::to_string(port));
        ::close(s);
        throw TransportError(msg);
    }
    socklen_t len = sizeof addr;
    ::getsockname(s, reinterpret_cast<sockaddr*>(&addr), &len);
    if (on_bound) on_bound(ntohs(addr.sin_port));
    pollfd p{s, POLLIN, 0};
    int rc;
    while ((rc = ::poll(&p, 1, timeout_ms)) < 0 && errno == EINTR) {
    }
    if (rc <= 0) {
        ::close(s);
        throw TransportError("no connection within the timeout");
    }
    const int c = ::accept(s, nullptr, nullptr);
    ::close(s);
    if (c < 0) throw TransportError(sys_error("accept failed"));
    no_delay(c);
    return std::make_unique<FdChannel>(c, c, timeout_ms, true);
}

std::unique_ptr<FdChannel> tcp_connect(const std::string& host, std::uint16_t port, int timeout_ms) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
        throw TransportError("cannot resolve " + host);
    const int s = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (s < 0) {
        ::freeaddrinfo(res);
        throw TransportError(sys_error("socket failed"));
    }
    const int rc = ::connect(s, res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc != 0) {
        const auto msg = sys_error("cannot connect to " + host + ":" + std::to_string(port));
        ::close(s);
        throw TransportError(msg);
    }
    no_delay(s);
    return std::make_unique<FdChannel>(s, s, timeout_ms, true);
}

FramedPeer::FramedPeer(LineChannel& channel, std::string session) : channel_(channel), session_(std::move(session)) {}

void FramedPeer::send(const std::string& tag, const nlohmann::json& payload) {
    WireFrame f;
    f.session = session_;
    f.seq = out_seq_++;
    f.tag = tag;
    f.payload = payload;
    channel_.send(encode_frame(f));
}

void FramedPeer::send(const protocol::RoundMessage& msg) { send(protocol::tag_of(msg), protocol::payload_of(msg)); }

WireFrame FramedPeer::receive() {
    const std::string line = channel_.receive();
    WireFrame f;
    try {
        f = decode_frame(line);
    } catch (const ParseError& e) {
        throw ProtocolViolation(e.what());
    }
    if (!session_.empty() && f.session != session_) throw ProtocolViolation("frame for another session: " + f.session);
    if (in_seq_ && f.seq <= *in_seq_) throw ProtocolViolation("sequence number did not increase");
    in_seq_ = f.seq;
    if (f.tag == "error")
        throw ProtocolViolation("peer reported: " + (f.payload.is_string() ? f.payload.get<std::string>() : f.payload.dump()));
    return f;
}

protocol::RoundMessage FramedPeer::receive_message(const std::string& expected_tag) {
    const WireFrame f = receive();
    if (f.tag != expected_tag) throw ProtocolViolation("expected '" + expected_tag + "', got '" + f.tag + "'");
    return f.message();
}

void FramedPeer::expect_control(const std::string& tag) {
    const WireFrame f = receive();
    if (f.tag != tag) throw ProtocolViolation("expected '" + tag + "', got '" + f.tag + "'");
}

void RemoteProver::setup(const protocol::KeyMsg& key) {
    peer_.send(key);
    peer_.expect_control("ready");
}

protocol::ImageMsg RemoteProver::round1() {
    peer_.send("round1", nlohmann::json::object());
    return std::get<protocol::ImageMsg>(peer_.receive_message("image"));
}

BitString RemoteProver::answer_preimage() {
    peer_.send(protocol::ChallengeMsg{protocol::Challenge::Preimage});
    return std::get<protocol::PreimageMsg>(peer_.receive_message("preimage")).x;
}

BitString RemoteProver::round2(const BitString& r) {
    peer_.send(protocol::ChallengeMsg{protocol::Challenge::Continue});
    peer_.send(protocol::VectorMsg{r});
    return std::get<protocol::EquationMsg>(peer_.receive_message("equation")).d;
}

bool RemoteProver::round3(protocol::Basis m) {
    peer_.send(protocol::BasisMsg{m});
    return std::get<protocol::ResultMsg>(peer_.receive_message("result")).bit;
}

void RemoteProver::reset() {
    peer_.send("reset", nlohmann::json::object());
    peer_.expect_control("ready");
}

std::string session_id(std::uint64_t seed) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(mix_seed(seed, 0x5e55)));
    return buf;
}

namespace {

SessionResult drive(protocol::ProverInterface& prover, const tcf::TcfKey& secret_key, const VerifyOptions& opt) {
    if (opt.trials < 1) throw PreconditionError("trials must be at least 1");
    protocol::Verifier verifier(secret_key, opt.verifier);
    prover.setup(verifier.key_message());
    Rng rng(mix_seed(opt.seed, 0x7e51));
    SessionResult out;
    protocol::ScoreTally tally;
    for (std::uint64_t i = 0; i < opt.trials; ++i) {
        auto t = protocol::run_iteration(verifier, prover, rng, i);
        tally.add(t.outcome);
        if (opt.keep_transcripts) out.transcripts.push_back(std::move(t));
    }
    out.report = tally.report();
    return out;
}

}  // namespace

SessionResult serve_verifier(LineChannel& channel, const tcf::TcfKey& secret_key, const VerifyOptions& opt) {
    if (!secret_key.has_trapdoor()) throw PreconditionError("the verifier needs the secret key");
    FramedPeer peer(channel, session_id(opt.seed));
    peer.send("start", {{"trials", opt.trials}});
    peer.expect_control("ready");
    RemoteProver remote(peer);
    SessionResult out;
    try {
        out = drive(remote, secret_key, opt);
    } catch (const ProtocolViolation& e) {
        try {
            peer.send("error", e.what());
        } catch (const TransportError&) {
        }
        throw;
    }
    peer.send("end", out.report.to_json());
    return out;
}

SessionResult run_local(protocol::ProverInterface& prover, const tcf::TcfKey& secret_key, const VerifyOptions& opt) {
    return drive(prover, secret_key, opt);
}

void run_prover(LineChannel& channel, protocol::ProverInterface& prover) {
    FramedPeer peer(channel, "");
    const WireFrame start = peer.receive();
    if (start.tag != "start") throw ProtocolViolation("session must open with 'start', got '" + start.tag + "'");
    peer.adopt_session(start.session);
    peer.send("ready", nlohmann::json::object());
    try {
        for (;;) {
            const WireFrame f = peer.receive();
            if (f.tag == "end") return;
            if (f.tag == "round1") {
                peer.send(prover.round1());
            } else if (f.tag == "reset") {
                prover.reset();
                peer.send("ready", nlohmann::json::object());
            } else if (f.tag == "key") {
                prover.setup(std::get<protocol::KeyMsg>(f.message()));
                peer.send("ready", nlohmann::json::object());
            } else if (f.tag == "challenge") {
                const auto c = std::get<protocol::ChallengeMsg>(f.message()).challenge;
                if (c == protocol::Challenge::Preimage) {
                    peer.send(protocol::PreimageMsg{prover.answer_preimage()});
                } else {
                    const auto r = std::get<protocol::VectorMsg>(peer.receive_message("vector")).r;
                    peer.send(protocol::EquationMsg{prover.round2(r)});
                }
            } else if (f.tag == "basis") {
                peer.send(protocol::ResultMsg{prover.round3(std::get<protocol::BasisMsg>(f.message()).m)});
            } else {
                throw ProtocolViolation("unexpected '" + f.tag + "' from the verifier");
            }
        }
    } catch (const TransportError&) {
        throw;
    } catch (const std::exception& e) {
        try {
            peer.send("error", e.what());
        } catch (const TransportError&) {
        }
        if (dynamic_cast<const ProtocolViolation*>(&e)) throw;
        throw ProtocolViolation(e.what());
    }
}

}  // namespace qadv::wire
