#include "bluff/harness.h"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <unordered_map>

#include "bluff/config_text.h"

namespace bluff {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Sub-stream ids for MixSeed.
enum Stream : uint64_t {
  kTrainDeals = 10,
  kCfrTraversal = 11,
  kCfrActTrain = 12,
  kDqnActTrain = 13,
  kDqnInit = 14,
  kEvalDeals = 20,
  kCfrActEval = 21,
  kDqnActEval = 22,
};

// Everything the DQN sees is a function of these five values.
uint64_t ObservationCacheKey(const GameState& s, int player) {
  const auto board = s.public_card();
  uint64_t key = static_cast<uint64_t>(s.private_card(player).Id());
  key |= static_cast<uint64_t>(board ? board->Id() : kNumCards) << 6;
  key |= static_cast<uint64_t>(s.contribution(player)) << 12;
  key |= static_cast<uint64_t>(s.contribution(1 - player)) << 20;
  key |= static_cast<uint64_t>(Index(s.phase())) << 28;
  return key;
}

void ApplySetting(RunConfig& c, const std::string& key, const json& value) {
  auto as_int = [&] { return ConfigInt(value); };
  if (key == "train_episodes") {
    c.train_episodes = as_int();
  } else if (key == "eval_games") {
    c.eval_games = as_int();
  } else if (key == "cfr_iters_per_episode") {
    c.cfr_iters_per_episode = static_cast<int>(as_int());
  } else if (key == "seed") {
    c.seed = static_cast<uint64_t>(as_int());
  } else if (key == "checkpoint_every") {
    c.checkpoint_every = as_int();
  } else if (key == "winrate_window") {
    c.winrate_window = static_cast<int>(as_int());
  } else if (key == "gzip_logs") {
    c.gzip_logs = ConfigBool(value);
  } else if (key == "out_dir") {
    c.out_dir = value.get<std::string>();
  } else if (key == "dqn_seat" || key == "cfr_seat") {
    const int64_t seat = as_int();
    if (seat != (key == "dqn_seat" ? kDqnSeat : kCfrSeat)) {
      throw std::invalid_argument("seats are fixed: dqn_seat=0, cfr_seat=1");
    }
  } else if (key == "dqn") {
    if (value != RunConfig{}.ToJson().at("dqn")) {
      throw std::invalid_argument("DQN hyperparameters are fixed; remove the 'dqn' key");
    }
  } else if (key != "preset") {
    throw std::invalid_argument("unknown config key: " + key);
  }
}

void AtomicSave(const fs::path& path, const std::function<void(const std::string&)>& save) {
  const fs::path tmp = path.string() + ".tmp";
  save(tmp.string());
  fs::rename(tmp, path);
}

struct Seats {
  DqnAgent* dqn_train = nullptr;  // null during evaluation
  const DqnAgent* dqn = nullptr;
  const CfrSolver* cfr = nullptr;
};

// Plays one game, appends its records to `log` and returns the payoffs.
// In training mode the DQN's transitions are collected into `transitions`.
std::array<int, kNumPlayers> PlayEpisode(GameState state, int64_t episode, const Seats& seats,
                                         double dqn_epsilon, Rng& dqn_rng, Rng& cfr_rng,
                                         LineWriter& log, std::vector<Transition>* transitions) {
  std::vector<StepRecord> records;
  std::optional<Transition> pending;
  int step = 0;
  while (!state.is_terminal()) {
    const int p = state.current_player();
    Action a;
    std::optional<double> eps;
    if (p == kDqnSeat) {
      eps = dqn_epsilon;
      const Observation obs = EncodeObservation(state, p);
      if (pending) {
        pending->terminal = false;
        pending->next_obs = obs;
        pending->next_legal = LegalActions(state);
        transitions->push_back(*pending);
      }
      a = seats.dqn->Act(state, p, dqn_epsilon, dqn_rng);
      if (transitions != nullptr) {
        pending = Transition{};
        pending->obs = obs;
        pending->action = Index(a);
      }
    } else {
      a = seats.cfr->Act(state, cfr_rng);
    }
    records.push_back(MakeStepRecord(state, a, episode, step++, eps));
    state = ApplyAction(state, a);
  }
  const auto payoffs = ShowdownPayoffs(state);
  if (pending) {
    pending->reward = payoffs[kDqnSeat];
    pending->terminal = true;
    transitions->push_back(*pending);
  }
  for (StepRecord& r : records) {
    r.payoffs = payoffs;
    log.Write(ToJsonLine(r));
  }
  return payoffs;
}

void WriteJsonFile(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

RunConfig RunConfig::Full() { return RunConfig{}; }

RunConfig RunConfig::Desk() {
  RunConfig c;
  c.train_episodes = 20000;
  c.eval_games = 20000;
  return c;
}

RunConfig RunConfig::FromText(const std::string& text) {
  const json settings = ParseConfigText(text);
  if (!settings.is_object()) throw std::invalid_argument("config must be an object");
  RunConfig c;
  if (settings.contains("preset")) {
    const std::string preset = settings["preset"].get<std::string>();
    if (preset == "desk") {
      c = Desk();
    } else if (preset != "full") {
      throw std::invalid_argument("unknown preset: " + preset);
    }
  }
  for (const auto& [key, value] : settings.items()) ApplySetting(c, key, value);
  c.Validate();
  return c;
}

RunConfig RunConfig::FromFile(const std::string& path) { return FromText(ReadTextFile(path)); }

void RunConfig::Validate() const {
  if (train_episodes < 1) throw std::invalid_argument("train_episodes must be >= 1");
  if (eval_games < 1) throw std::invalid_argument("eval_games must be >= 1");
  if (cfr_iters_per_episode < 1) throw std::invalid_argument("cfr_iters_per_episode must be >= 1");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be >= 0");
  if (winrate_window < 1) throw std::invalid_argument("winrate_window must be >= 1");
}

json RunConfig::ToJson() const {
  return json{{"train_episodes", train_episodes},
              {"eval_games", eval_games},
              {"cfr_iters_per_episode", cfr_iters_per_episode},
              {"dqn_seat", kDqnSeat},
              {"cfr_seat", kCfrSeat},
              {"seed", seed},
              {"checkpoint_every", checkpoint_every},
              {"winrate_window", winrate_window},
              {"gzip_logs", gzip_logs},
              {"dqn",
               {{"layers", dqn.LayerSizes()},
                {"learning_rate", dqn.learning_rate},
                {"batch_size", dqn.batch_size},
                {"epsilon_start", dqn.epsilon_start},
                {"epsilon_end", dqn.epsilon_end},
                {"epsilon_decay_steps", dqn.epsilon_decay_steps},
                {"replay_capacity", dqn.replay_capacity},
                {"replay_min_size", dqn.replay_min_size},
                {"target_update_every", dqn.target_update_every},
                {"discount", dqn.discount},
                {"train_every", dqn.train_every}}}};
}

OpponentPolicy DqnAsOpponentPolicy(const DqnAgent& agent, double epsilon) {
  struct Cache {
    uint64_t version;
    std::unordered_map<uint64_t, std::array<double, kNumActions>> q;
  };
  auto cache = std::make_shared<Cache>(Cache{agent.version(), {}});
  return [&agent, epsilon, cache](const GameState& state, int player) {
    if (cache->version != agent.version()) {
      cache->q.clear();
      cache->version = agent.version();
    }
    const uint64_t key = ObservationCacheKey(state, player);
    auto it = cache->q.find(key);
    if (it == cache->q.end()) it = cache->q.emplace(key, agent.QValues(state, player)).first;
    return EpsilonGreedyProbs(it->second, LegalActions(state), epsilon);
  };
}

RunResult RunTraining(const RunConfig& config, const std::function<void(int64_t)>& progress) {
  config.Validate();
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);

  Rng deal_rng(MixSeed(config.seed, kTrainDeals));
  Rng traversal_rng(MixSeed(config.seed, kCfrTraversal));
  Rng cfr_act_rng(MixSeed(config.seed, kCfrActTrain));
  Rng dqn_act_rng(MixSeed(config.seed, kDqnActTrain));
  DqnAgent dqn(config.dqn, MixSeed(config.seed, kDqnInit));
  CfrSolver cfr(kCfrSeat);

  auto save_checkpoints = [&] {
    AtomicSave(dir / "cfr.ckpt", [&](const std::string& p) { cfr.SaveFile(p); });
    AtomicSave(dir / "dqn.ckpt", [&](const std::string& p) { dqn.SaveFile(p); });
  };

  RunResult result;
  result.log_path = (dir / config.train_log_name()).string();
  LineWriter log(result.log_path);
  const Seats seats{&dqn, &dqn, &cfr};
  std::vector<Transition> transitions;
  for (int64_t episode = 0; episode < config.train_episodes; ++episode) {
    const double epsilon = dqn.epsilon();
    cfr.TrainIterations(config.cfr_iters_per_episode, DqnAsOpponentPolicy(dqn, epsilon),
                        traversal_rng);

    transitions.clear();
    const auto payoffs = PlayEpisode(DealGame(deal_rng), episode, seats, epsilon, dqn_act_rng,
                                     cfr_act_rng, log, &transitions);
    ++result.wins[payoffs[0] > 0 ? 0 : 1];
    ++result.games;
    for (Transition& t : transitions) dqn.Feed(std::move(t));

    if (config.checkpoint_every > 0 && (episode + 1) % config.checkpoint_every == 0) {
      save_checkpoints();
    }
    if (progress) progress(episode + 1);
  }
  log.Close();
  save_checkpoints();

  json meta{{"config", config.ToJson()},
            {"seed", config.seed},
            {"cfr_iterations", cfr.iterations()},
            {"dqn_env_steps", dqn.env_steps()},
            {"dqn_train_steps", dqn.train_steps()},
            {"logs", {{config.train_log_name(), GitBlobHash(result.log_path)}}}};
  WriteJsonFile(dir / "run-meta.json", meta);
  return result;
}

RunResult RunEvaluation(const RunConfig& config, const std::string& checkpoint_dir,
                        const std::function<void(int64_t)>& progress) {
  config.Validate();
  const fs::path ckpt(checkpoint_dir);
  const fs::path meta_path = ckpt / "run-meta.json";
  if (fs::exists(meta_path)) {
    std::ifstream in(meta_path);
    const json meta = json::parse(in);
    const auto layers = meta.at("config").at("dqn").at("layers").get<std::vector<int>>();
    if (layers != config.dqn.LayerSizes()) {
      throw std::runtime_error("checkpoint network layout does not match the configuration");
    }
  }
  const CfrSolver cfr = CfrSolver::LoadFile((ckpt / "cfr.ckpt").string());
  if (cfr.seat() != kCfrSeat || cfr.deck() != Deck::kFull52) {
    throw std::runtime_error("CFR checkpoint must be a full52 solver for seat 1");
  }
  DqnAgent dqn(config.dqn, 0);
  dqn.LoadFile((ckpt / "dqn.ckpt").string());

  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  Rng deal_rng(MixSeed(config.seed, kEvalDeals));
  Rng cfr_act_rng(MixSeed(config.seed, kCfrActEval));
  Rng dqn_act_rng(MixSeed(config.seed, kDqnActEval));

  RunResult result;
  result.log_path = (dir / config.eval_log_name()).string();
  LineWriter log(result.log_path);
  const Seats seats{nullptr, &dqn, &cfr};
  for (int64_t game = 0; game < config.eval_games; ++game) {
    const auto payoffs = PlayEpisode(DealGame(deal_rng), game, seats, 0.0, dqn_act_rng,
                                     cfr_act_rng, log, nullptr);
    ++result.wins[payoffs[0] > 0 ? 0 : 1];
    ++result.games;
    if (progress) progress(game + 1);
  }
  log.Close();

  json meta{{"config", config.ToJson()},
            {"seed", config.seed},
            {"checkpoints",
             {{"cfr.ckpt", GitBlobHash((ckpt / "cfr.ckpt").string())},
              {"dqn.ckpt", GitBlobHash((ckpt / "dqn.ckpt").string())}}},
            {"logs", {{config.eval_log_name(), GitBlobHash(result.log_path)}}}};
  WriteJsonFile(dir / "eval-meta.json", meta);
  return result;
}

WinRateSeries ComputeWinRates(std::span<const StepRecord> log, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  const auto episodes = SplitEpisodes(log);
  if (episodes.empty()) throw std::invalid_argument("log contains no complete episode");
  WinRateSeries series;
  series.window = window;
  for (size_t begin = 0; begin < episodes.size(); begin += static_cast<size_t>(window)) {
    const size_t end = std::min(episodes.size(), begin + static_cast<size_t>(window));
    std::array<int64_t, kNumPlayers> wins{};
    for (size_t e = begin; e < end; ++e) ++wins[episodes[e].front().payoffs[0] > 0 ? 0 : 1];
    WinRateWindow w;
    w.first_game = static_cast<int64_t>(begin);
    w.games = static_cast<int64_t>(end - begin);
    for (int p = 0; p < kNumPlayers; ++p) {
      w.win_rate[p] = static_cast<double>(wins[p]) / static_cast<double>(w.games);
    }
    series.windows.push_back(w);
  }
  return series;
}

std::array<double, kNumPlayers> TrailingWinRates(std::span<const StepRecord> log, int64_t games) {
  const auto episodes = SplitEpisodes(log);
  if (episodes.empty()) throw std::invalid_argument("log contains no complete episode");
  const size_t n = std::min(episodes.size(), static_cast<size_t>(games));
  std::array<int64_t, kNumPlayers> wins{};
  for (size_t e = episodes.size() - n; e < episodes.size(); ++e) {
    ++wins[episodes[e].front().payoffs[0] > 0 ? 0 : 1];
  }
  return {static_cast<double>(wins[0]) / static_cast<double>(n),
          static_cast<double>(wins[1]) / static_cast<double>(n)};
}

std::string GitBlobHash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  const auto size = fs::file_size(path);
  const std::string header = "blob " + std::to_string(size) + '\0';

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 unavailable");
  }
  EVP_DigestUpdate(ctx.get(), header.data(), header.size());
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

}  // namespace bluff
