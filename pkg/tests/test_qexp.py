import numpy as np
import pytest

from trevl.qexp import (
    AgentConfig,
    QTable,
    QueryExpansionEnv,
    format_curve,
    q_update,
    run_random_baseline,
    select_action,
    train,
)
from trevl.synth import SynthConfig, build_index, sample_collection, sample_queries


@pytest.fixture(scope="module")
def setup():
    config = SynthConfig(vocab_size=150, collection_size=25, mean_doc_length=50.0,
                         relevant_per_query=4, query_count=40, seed=5)
    collection = sample_collection(config)
    queries = sample_queries(collection, config)
    index = build_index(collection)
    return collection, queries, index


@pytest.fixture
def env(setup):
    _, queries, index = setup
    return QueryExpansionEnv(index, queries)


class TestReset:
    def test_observation_marks_query_terms(self, env, setup):
        _, queries, _ = setup
        qid = queries.query_ids[0]
        obs = env.reset(qid)
        expected = sorted(set(queries.queries[0].tolist()))
        assert np.flatnonzero(obs).tolist() == expected

    def test_duplicate_terms_set_single_bit(self, env):
        env.reset(env.queries.query_ids[0])
        env._terms = [3, 3]
        env._active = set(env._terms)
        assert np.flatnonzero(env._observation()).tolist() == [3]

    def test_reset_is_idempotent(self, env, setup):
        _, queries, _ = setup
        qid = queries.query_ids[2]
        first = env.reset(qid)
        ndcg_first = env.last_ndcg
        second = env.reset(qid)
        assert np.array_equal(first, second)
        assert env.last_ndcg == ndcg_first

    def test_unknown_query_id(self, env):
        with pytest.raises(ValueError, match="unknown query id"):
            env.reset("no-such-query")


class TestStep:
    def test_null_op_rewards_zero(self, env, setup):
        _, queries, _ = setup
        env.reset(queries.query_ids[1])
        before_state = env.state_key
        before_ndcg = env.last_ndcg
        _, reward, done = env.step(env.null_action)
        assert reward == 0.0
        assert env.state_key == before_state
        assert env.last_ndcg == before_ndcg
        assert env.step_count == 1

    def test_readding_active_term_is_noop(self, env, setup):
        _, queries, _ = setup
        env.reset(queries.query_ids[1])
        before_state = env.state_key
        before_ndcg = env.last_ndcg
        term = int(queries.queries[1][0])  # already part of the query
        _, reward, _ = env.step(term)
        assert reward == 0.0
        assert env.state_key == before_state
        assert env.last_ndcg == before_ndcg

    def test_expansion_changes_state(self, env, setup):
        _, queries, _ = setup
        env.reset(queries.query_ids[3])
        new_term = next(t for t in range(env.vocab_size) if t not in env.state_key)
        obs, _, _ = env.step(new_term)
        assert obs[new_term] == 1
        assert new_term in env.state_key

    def test_episode_ends_after_five_actions(self, env, setup):
        _, queries, _ = setup
        env.reset(queries.query_ids[4])
        done = False
        for i in range(5):
            assert not done
            _, _, done = env.step(env.null_action)
        assert done and env.step_count == 5

    def test_step_after_done_raises(self, env, setup):
        _, queries, _ = setup
        env.reset(queries.query_ids[4])
        for _ in range(5):
            env.step(env.null_action)
        with pytest.raises(RuntimeError, match="reset"):
            env.step(env.null_action)

    def test_action_bounds(self, env, setup):
        _, queries, _ = setup
        env.reset(queries.query_ids[0])
        with pytest.raises(ValueError):
            env.step(env.null_action + 1)

    def test_reward_telescopes(self, env, setup):
        _, queries, _ = setup
        rng = np.random.default_rng(0)
        for qi in range(10):
            env.reset(queries.query_ids[qi])
            initial = env.last_ndcg
            total = 0.0
            while not env.done:
                _, reward, _ = env.step(int(rng.integers(env.n_actions)))
                total += reward
            assert abs(total - (env.last_ndcg - initial)) <= 1e-9


class TestQTable:
    def test_unvisited_reads_zero(self):
        table = QTable(10)
        assert table.get((1, 2), 3) == 0.0

    def test_argmax_zero_table_lowest_index(self):
        assert QTable(10).argmax((0,)) == 0

    def test_argmax_positive_entry(self):
        table = QTable(10)
        table.set((0,), 7, 0.3)
        assert table.argmax((0,)) == 7

    def test_argmax_prefers_implicit_zero_over_negative(self):
        table = QTable(3)
        table.set((0,), 0, -0.5)
        assert table.argmax((0,)) == 1

    def test_argmax_zero_tie_prefers_lowest(self):
        table = QTable(3)
        table.set((0,), 2, 0.0)
        assert table.argmax((0,)) == 0

    def test_argmax_full_negative_row(self):
        table = QTable(2)
        table.set((0,), 0, -0.2)
        table.set((0,), 1, -0.1)
        assert table.argmax((0,)) == 1

    def test_max_value_with_negatives_and_missing(self):
        table = QTable(3)
        table.set((0,), 0, -1.0)
        assert table.max_value((0,)) == 0.0
        table.set((0,), 1, 2.0)
        assert table.max_value((0,)) == 2.0


class TestSelectAction:
    def test_greedy_zero_table(self):
        rng = np.random.default_rng(0)
        assert select_action(QTable(11), (0,), 0.0, rng) == 0

    def test_greedy_picks_learned_action(self):
        table = QTable(11)
        table.set((0,), 7, 0.3)
        assert select_action(table, (0,), 0.0, np.random.default_rng(0)) == 7

    def test_epsilon_one_is_uniform(self):
        rng = np.random.default_rng(123)
        table = QTable(5)
        draws = [select_action(table, (0,), 1.0, rng) for _ in range(5000)]
        counts = np.bincount(draws, minlength=5)
        assert counts.min() > 0.8 * 1000 and counts.max() < 1.2 * 1000

    def test_epsilon_zero_consumes_no_randomness(self):
        rng = np.random.default_rng(9)
        before = rng.bit_generator.state
        select_action(QTable(5), (0,), 0.0, rng)
        assert rng.bit_generator.state == before


class TestQUpdate:
    def test_terminal_update(self):
        table = QTable(4)
        q_update(table, (0,), 1, 0.5, (1,), True, 0.1, 0.95)
        assert table.get((0,), 1) == pytest.approx(0.05)

    def test_bootstrapped_update(self):
        table = QTable(4)
        table.set((1,), 2, 1.0)
        q_update(table, (0,), 1, 0.0, (1,), False, 0.1, 0.95)
        assert table.get((0,), 1) == pytest.approx(0.095)

    def test_zero_fixed_point(self):
        table = QTable(4)
        q_update(table, (0,), 1, 0.0, (1,), False, 0.1, 0.95)
        assert table.get((0,), 1) == 0.0


class TestTrain:
    def test_zero_episodes(self, setup):
        collection, queries, _ = setup
        result = train(collection, queries, AgentConfig(episodes=0, seed=0))
        assert result.curve == []

    def test_deterministic_curve(self, setup):
        collection, queries, _ = setup
        config = AgentConfig(episodes=60, seed=4)
        first = train(collection, queries, config)
        second = train(collection, queries, config)
        assert first.curve == second.curve

    def test_round_robin_schedule(self, setup):
        collection, queries, _ = setup
        result = train(collection, queries, AgentConfig(episodes=45, seed=1))
        n = len(queries.query_ids)
        for rec in result.curve:
            assert rec.query_id == queries.query_ids[rec.episode % n]

    def test_episode_invariants(self, setup):
        collection, queries, _ = setup
        result = train(collection, queries, AgentConfig(episodes=120, seed=2))
        for rec in result.curve:
            assert rec.steps <= 5
            assert abs(rec.total_reward - (rec.final_ndcg - rec.initial_ndcg)) <= 1e-9
        assert all(abs(v) <= 20.0 for v in result.qtable.values())

    def test_running_mean_window(self, setup):
        collection, queries, _ = setup
        result = train(collection, queries, AgentConfig(episodes=150, seed=3))
        totals = [rec.total_reward for rec in result.curve]
        expected = sum(totals[50:150]) / 100
        assert result.curve[-1].running_mean == pytest.approx(expected)

    def test_format_curve(self, setup):
        collection, queries, _ = setup
        result = train(collection, queries, AgentConfig(episodes=3, seed=0))
        lines = format_curve(result.curve).splitlines()
        assert lines[0].startswith("episode\t")
        assert len(lines) == 4

    def test_random_baseline_runs(self, setup):
        collection, queries, _ = setup
        value = run_random_baseline(collection, queries, episodes=30, seed=7)
        assert -1.0 <= value <= 1.0


class TestCliEntry:
    def test_curve_on_stdout(self, tmp_path, capsys):
        from trevl.qexp import main

        config = tmp_path / "tiny.cfg"
        config.write_text(
            "vocab_size = 80\ncollection_size = 12\nmean_doc_length = 30\n"
            "relevant_per_query = 3\nquery_count = 6\nseed = 5\n"
        )
        status = main([
            "--config", str(config), "--episodes", "12",
            "--alpha", "0.1", "--gamma", "0.95", "--epsilon", "0.05", "--seed", "3",
        ])
        assert status == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("episode\t")
        assert len(lines) == 13

    def test_missing_config(self, tmp_path, capsys):
        from trevl.qexp import main

        assert main(["--config", str(tmp_path / "nope.cfg")]) == 2
        assert "cannot read" in capsys.readouterr().err


class TestGreedyRollout:
    def test_epsilon_zero_rollouts_deterministic(self, setup):
        collection, queries, index = setup
        env = QueryExpansionEnv(index, queries)
        result = train(collection, queries, AgentConfig(episodes=80, seed=6))
        qid = queries.query_ids[0]
        rollouts = []
        for _ in range(2):
            env.reset(qid)
            actions = []
            while not env.done:
                action = result.qtable.argmax(env.state_key)
                actions.append(action)
                env.step(action)
            rollouts.append(actions)
        assert rollouts[0] == rollouts[1]
