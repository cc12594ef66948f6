"""Query-expansion environment and tabular Q-learning agent.

An episode starts from a sampled query; each action appends one vocabulary
term to the query (actions 0..V-1) or does nothing (action V). After every
expansion the top-10 documents are re-retrieved and the reward is the
change in full-ranking NDCG against the query's judgments. An episode ends
after five actions or as soon as NDCG reaches 1.0. The observation is the
binary over-the-vocabulary indicator of terms active in the expanded
query; the Q-table keys states by the sorted active-term tuple, which
encodes the same information sparsely.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from trevl.core import ndcg
from trevl.synth import (
    Index,
    QueryCollection,
    SynthConfig,
    SyntheticCollection,
    build_index,
    parse_config,
    retrieve,
    sample_collection,
    sample_queries,
)

StateKey = tuple[int, ...]


@dataclass(frozen=True)
class AgentConfig:
    learning_rate: float = 0.1
    discount: float = 0.95
    exploration: float = 0.05
    episodes: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning rate must be in (0, 1]")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must be in [0, 1]")
        if not 0.0 <= self.exploration <= 1.0:
            raise ValueError("exploration must be in [0, 1]")
        if self.episodes < 0:
            raise ValueError("episodes must be >= 0")


class QTable:
    """Sparse state/action values; anything unvisited reads as exactly 0."""

    def __init__(self, n_actions: int):
        self.n_actions = n_actions
        self._rows: dict[StateKey, dict[int, float]] = {}

    def get(self, state: StateKey, action: int) -> float:
        row = self._rows.get(state)
        if row is None:
            return 0.0
        return row.get(action, 0.0)

    def set(self, state: StateKey, action: int, value: float) -> None:
        self._rows.setdefault(state, {})[action] = value

    def max_value(self, state: StateKey) -> float:
        row = self._rows.get(state)
        if not row:
            return 0.0
        best = max(row.values())
        if best < 0.0 and len(row) < self.n_actions:
            return 0.0  # some action is still at its initial 0
        return best

    def argmax(self, state: StateKey) -> int:
        """Greedy action; ties go to the lowest action index."""
        row = self._rows.get(state)
        if not row:
            return 0
        best_a = -1
        best_v = -np.inf
        for action, value in row.items():
            if value > best_v or (value == best_v and action < best_a):
                best_a, best_v = action, value
        if best_v <= 0.0 and len(row) < self.n_actions:
            missing = self._first_missing(row)
            if best_v < 0.0:
                return missing
            if missing < best_a:
                return missing
        return best_a

    def _first_missing(self, row: dict[int, float]) -> int:
        for action in range(self.n_actions):
            if action not in row:
                return action
        raise AssertionError("row is full")  # guarded by the len() checks

    def __len__(self) -> int:
        return sum(len(row) for row in self._rows.values())

    def values(self) -> Iterable[float]:
        for row in self._rows.values():
            yield from row.values()


def select_action(qtable: QTable, state: StateKey, epsilon: float, rng: np.random.Generator) -> int:
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(qtable.n_actions))
    return qtable.argmax(state)


def q_update(
    qtable: QTable,
    state: StateKey,
    action: int,
    reward: float,
    next_state: StateKey,
    done: bool,
    learning_rate: float,
    discount: float,
) -> None:
    current = qtable.get(state, action)
    target = reward if done else reward + discount * qtable.max_value(next_state)
    qtable.set(state, action, current + learning_rate * (target - current))


class QueryExpansionEnv:
    """Episodic query expansion against a fixed index and query set."""

    def __init__(
        self,
        index: Index,
        queries: QueryCollection,
        mu: float = 2500.0,
        top_k: int = 10,
        max_steps: int = 5,
    ):
        self.index = index
        self.queries = queries
        self.mu = mu
        self.top_k = top_k
        self.max_steps = max_steps
        self.vocab_size = len(index.collection_probs)
        self.null_action = self.vocab_size
        self.n_actions = self.vocab_size + 1
        self._by_id = {qid: i for i, qid in enumerate(queries.query_ids)}
        self._terms: list[int] = []
        self._added: list[int] = []
        self._active: set[int] = set()
        self._judgments: dict[str, int] = {}
        self._steps = 0
        self._ndcg = 0.0
        self._done = True

    @property
    def done(self) -> bool:
        return self._done

    @property
    def last_ndcg(self) -> float:
        return self._ndcg

    @property
    def step_count(self) -> int:
        return self._steps

    @property
    def state_key(self) -> StateKey:
        return tuple(sorted(self._active))

    def _observation(self) -> np.ndarray:
        obs = np.zeros(self.vocab_size, dtype=np.uint8)
        obs[list(self._active)] = 1
        return obs

    def _rank_and_score(self) -> float:
        ranking = retrieve(self.index, self._terms + self._added, self.mu, self.top_k)
        return ndcg(ranking, self._judgments)

    def reset(self, query_id: str) -> np.ndarray:
        try:
            qi = self._by_id[query_id]
        except KeyError:
            raise ValueError(f"unknown query id {query_id!r}") from None
        self._terms = [int(t) for t in self.queries.queries[qi]]
        self._added = []
        self._active = set(self._terms)
        self._judgments = self.queries.qrels.queries[query_id]
        self._steps = 0
        self._ndcg = self._rank_and_score()
        self._done = self._ndcg == 1.0  # nothing left to improve
        return self._observation()

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if self._done:
            raise RuntimeError("episode is finished; call reset() first")
        if not 0 <= action <= self.null_action:
            raise ValueError(f"action {action} outside 0..{self.null_action}")
        self._steps += 1
        if action == self.null_action or action in self._active:
            # no-op or idempotent re-add: retrieval input is unchanged
            reward = 0.0
        else:
            self._active.add(action)
            self._added.append(action)
            new_ndcg = self._rank_and_score()
            reward = new_ndcg - self._ndcg
            self._ndcg = new_ndcg
        self._done = self._steps >= self.max_steps or self._ndcg == 1.0
        return self._observation(), reward, self._done


class EpisodeRecord(NamedTuple):
    episode: int
    query_id: str
    steps: int
    total_reward: float
    mean_step_reward: float
    running_mean: float  # window of 100 episodes over total_reward
    initial_ndcg: float
    final_ndcg: float


class TrainResult(NamedTuple):
    curve: list[EpisodeRecord]
    qtable: QTable


def train(
    collection: SyntheticCollection,
    queries: QueryCollection,
    config: AgentConfig,
    mu: float = 2500.0,
    top_k: int = 10,
    max_steps: int = 5,
) -> TrainResult:
    """Q-learning over the query set, visited round-robin.

    Returns the per-episode reward curve (with a 100-episode running mean)
    and the learned table. Deterministic for a fixed (inputs, seed).
    """
    index = build_index(collection)
    env = QueryExpansionEnv(index, queries, mu=mu, top_k=top_k, max_steps=max_steps)
    qtable = QTable(env.n_actions)
    rng = np.random.default_rng(config.seed)
    curve: list[EpisodeRecord] = []
    window: list[float] = []
    n_queries = len(queries.query_ids)
    for episode in range(config.episodes):
        qid = queries.query_ids[episode % n_queries]
        env.reset(qid)
        initial = env.last_ndcg
        total = 0.0
        steps = 0
        while not env.done:
            state = env.state_key
            action = select_action(qtable, state, config.exploration, rng)
            _, reward, done = env.step(action)
            q_update(
                qtable, state, action, reward, env.state_key, done,
                config.learning_rate, config.discount,
            )
            total += reward
            steps += 1
        window.append(total)
        if len(window) > 100:
            window.pop(0)
        curve.append(
            EpisodeRecord(
                episode=episode,
                query_id=qid,
                steps=steps,
                total_reward=total,
                mean_step_reward=total / steps if steps else 0.0,
                running_mean=sum(window) / len(window),
                initial_ndcg=initial,
                final_ndcg=env.last_ndcg,
            )
        )
    return TrainResult(curve, qtable)


def run_random_baseline(
    collection: SyntheticCollection,
    queries: QueryCollection,
    episodes: int,
    seed: int,
    mu: float = 2500.0,
    top_k: int = 10,
    max_steps: int = 5,
) -> float:
    """Mean episode reward of a uniform-random policy on the same schedule."""
    index = build_index(collection)
    env = QueryExpansionEnv(index, queries, mu=mu, top_k=top_k, max_steps=max_steps)
    rng = np.random.default_rng(seed)
    totals = []
    n_queries = len(queries.query_ids)
    for episode in range(episodes):
        env.reset(queries.query_ids[episode % n_queries])
        total = 0.0
        while not env.done:
            _, reward, _ = env.step(int(rng.integers(env.n_actions)))
            total += reward
        totals.append(total)
    return float(np.mean(totals)) if totals else 0.0


def format_curve(curve: list[EpisodeRecord]) -> str:
    lines = ["episode\tquery\tsteps\ttotal_reward\tmean_step_reward\trunning_mean_100\n"]
    for rec in curve:
        lines.append(
            f"{rec.episode}\t{rec.query_id}\t{rec.steps}\t{rec.total_reward:.6f}\t"
            f"{rec.mean_step_reward:.6f}\t{rec.running_mean:.6f}\n"
        )
    return "".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="trevl-rl",
        description="Train a tabular query-expansion agent on a synthetic collection.",
    )
    parser.add_argument("--config", default=None, help="synthesizer config file (key = value lines)")
    parser.add_argument("--episodes", type=int, default=1000)
    parser.add_argument("--alpha", type=float, default=0.1)
    parser.add_argument("--gamma", type=float, default=0.95)
    parser.add_argument("--epsilon", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as fh:
                synth_config = parse_config(fh)
        except OSError as exc:
            print(f"trevl-rl: cannot read config: {exc}", file=sys.stderr)
            return 2
        except ValueError as exc:
            print(f"trevl-rl: {exc}", file=sys.stderr)
            return 2
    else:
        synth_config = SynthConfig()

    collection = sample_collection(synth_config)
    queries = sample_queries(collection, synth_config)
    agent_config = AgentConfig(
        learning_rate=args.alpha,
        discount=args.gamma,
        exploration=args.epsilon,
        episodes=args.episodes,
        seed=args.seed,
    )
    result = train(collection, queries, agent_config)
    sys.stdout.write(format_curve(result.curve))
    return 0


if __name__ == "__main__":
    sys.exit(main())
