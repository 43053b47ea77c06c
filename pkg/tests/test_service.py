import math
import time

from fastapi.testclient import TestClient

from actmon import framework
from actmon.config import RunConfig
from actmon.service import InteractiveAuthority, SessionRunner, create_app


def service_config(**kw):
    config = RunConfig(
        dataset_kind="synthetic",
        synth_classes=3,
        synth_dim=4,
        synth_per_class=40,
        synth_spread=0.05,
        known_classes=(0, 1),
        hidden_layers=(12,),
        feature_layer=0,
        epochs_init=25,
        epochs_run=25,
        learning_rate=0.3,
        batch_size=32,
        p=0.2,
        n_star_fraction=0.05,
        seed=11,
    )
    for k, v in kw.items():
        setattr(config, k, v)
    return config


def make_service(authority=None, autostart=False, **kw):
    config = service_config(**kw)
    if authority is None:
        authority = InteractiveAuthority(timeout=5.0)
    session = framework.create_session(config, authority=authority)
    runner = SessionRunner(session, authority, autostart=autostart)
    app = create_app(runner)
    return TestClient(app), runner, session


def drive_to_completion(client, session, max_seconds=30.0):
    """Scripted perfect human: answers every queue entry with ground truth."""
    deadline = time.monotonic() + max_seconds
    while time.monotonic() < deadline:
        state = client.get("/state").json()
        if state["run_state"] == "finished":
            return
        for entry in client.get("/queue").json()["entries"]:
            truth = session.stream.label_at(entry["input_index"])
            response = client.post(
                "/label", json={"query_id": entry["query_id"], "class_id": int(truth)}
            )
            assert response.status_code == 200
        time.sleep(0.002)
    raise TimeoutError("run did not finish in time")


class TestState:
    def test_503_without_session(self):
        client = TestClient(create_app(None))
        assert client.get("/state").status_code == 503
        assert client.get("/queue").status_code == 503

    def test_fresh_session_counters(self):
        client, runner, session = make_service()
        try:
            state = client.get("/state").json()
            assert state["queries_used"] == 0
            assert state["run_state"] == "paused"
            assert state["budget"] == math.ceil(0.2 * len(session.stream))
            assert state["stream_length"] == len(session.stream)
            assert [c["id"] for c in state["known_classes"]] == [0, 1]
            assert len(state["class_vocabulary"]) == 3
        finally:
            runner.stop()

    def test_queue_entry_appears_after_warning(self):
        client, runner, session = make_service(autostart=True)
        try:
            deadline = time.monotonic() + 20.0
            entries = []
            while time.monotonic() < deadline and not entries:
                entries = client.get("/queue").json()["entries"]
                time.sleep(0.005)
            assert entries, "no warning ever reached the queue"
            entry = entries[0]
            assert entry["confidence"] is not None  # quantitative strategy
            assert entry["width"] * entry["height"] * entry["channels"] == len(
                entry["pixels"]
            )
            state = client.get("/state").json()
            assert state["run_state"] == "waiting_for_label"
            assert state["queue_length"] == 1
        finally:
            runner.stop()

    def test_box_strategy_entry_has_no_confidence(self):
        client, runner, session = make_service(autostart=True, strategy="box")
        try:
            deadline = time.monotonic() + 20.0
            entries = []
            while time.monotonic() < deadline and not entries:
                entries = client.get("/queue").json()["entries"]
                time.sleep(0.005)
            assert entries and entries[0]["confidence"] is None
        finally:
            runner.stop()


class TestLabel:
    def test_label_removes_entry_and_counts_query(self):
        client, runner, session = make_service(autostart=True)
        try:
            entries = []
            deadline = time.monotonic() + 20.0
            while time.monotonic() < deadline and not entries:
                entries = client.get("/queue").json()["entries"]
                time.sleep(0.005)
            entry = entries[0]
            used_before = client.get("/state").json()["queries_used"]
            truth = session.stream.label_at(entry["input_index"])
            response = client.post(
                "/label", json={"query_id": entry["query_id"], "class_id": int(truth)}
            )
            assert response.status_code == 200
            assert response.json()["queries_used"] == used_before + 1
            remaining = {
                e["query_id"] for e in client.get("/queue").json()["entries"]
            }
            assert entry["query_id"] not in remaining
        finally:
            runner.stop()

    def test_duplicate_label_conflicts(self):
        client, runner, session = make_service(autostart=True)
        try:
            entries = []
            deadline = time.monotonic() + 20.0
            while time.monotonic() < deadline and not entries:
                entries = client.get("/queue").json()["entries"]
                time.sleep(0.005)
            entry = entries[0]
            truth = int(session.stream.label_at(entry["input_index"]))
            first = client.post(
                "/label", json={"query_id": entry["query_id"], "class_id": truth}
            )
            assert first.status_code == 200
            used_after_first = client.get("/state").json()["queries_used"]
            second = client.post(
                "/label", json={"query_id": entry["query_id"], "class_id": truth}
            )
            assert second.status_code == 409
            assert client.get("/state").json()["queries_used"] == used_after_first
        finally:
            runner.stop()

    def test_unknown_query_404(self):
        client, runner, _ = make_service()
        try:
            response = client.post("/label", json={"query_id": 999, "class_id": 0})
            assert response.status_code == 404
        finally:
            runner.stop()

    def test_invalid_class_422(self):
        client, runner, _ = make_service()
        try:
            response = client.post("/label", json={"query_id": 0, "class_id": 77})
            assert response.status_code == 422
        finally:
            runner.stop()


class TestControl:
    def test_pause_reflects_in_state(self):
        client, runner, _ = make_service(autostart=True)
        try:
            response = client.post("/control", json={"action": "pause"})
            assert response.status_code == 200
            assert client.get("/state").json()["run_state"] in ("paused", "waiting_for_label")
        finally:
            runner.stop()

    def test_invalid_transition_409(self):
        client, runner, _ = make_service()  # starts paused
        try:
            assert client.post("/control", json={"action": "pause"}).status_code == 409
        finally:
            runner.stop()

    def test_step_batch_advances_exactly_one_batch(self):
        authority = None  # oracle: no human needed
        config = service_config()
        session = framework.create_session(config)  # oracle authority
        runner = SessionRunner(session, session.authority)
        client = TestClient(create_app(runner))
        try:
            before = client.get("/state").json()["cursor"]
            assert client.post("/control", json={"action": "step_batch"}).status_code == 200
            deadline = time.monotonic() + 20.0
            while time.monotonic() < deadline:
                cursor = client.get("/state").json()["cursor"]
                if cursor != before:
                    break
                time.sleep(0.005)
            runner.wait_batch_boundary()
            after = client.get("/state").json()["cursor"]
            expected = min(before + session.stream.batch_size, len(session.stream))
            assert after == expected
        finally:
            runner.stop()

    def test_resume_continues_deterministically(self):
        # paused/stepped service run must equal a direct oracle run
        config = service_config()
        direct = framework.create_session(service_config())
        direct.run()

        session = framework.create_session(config)
        runner = SessionRunner(session, session.authority)
        client = TestClient(create_app(runner))
        try:
            assert client.post("/control", json={"action": "step_batch"}).status_code == 200
            runner.wait_batch_boundary()
            assert client.post("/control", json={"action": "resume"}).status_code == 200
            deadline = time.monotonic() + 30.0
            while time.monotonic() < deadline:
                if client.get("/state").json()["run_state"] == "finished":
                    break
                time.sleep(0.01)
            assert session.metrics_csv() == direct.metrics_csv()
            assert session.event_log_text() == direct.event_log_text()
        finally:
            runner.stop()


class TestMetricsStream:
    def test_rows_match_csv(self):
        session = framework.create_session(service_config())
        runner = SessionRunner(session, session.authority, autostart=True)
        client = TestClient(create_app(runner))
        try:
            received = []
            with client.stream("GET", "/metrics/stream") as response:
                for line in response.iter_lines():
                    received.append(line)
            expected = session.metrics_csv().splitlines()[1:]  # rows sans header
            assert received == expected
        finally:
            runner.stop()


class TestAuthorityEquivalence:
    def test_scripted_human_equals_oracle(self):
        oracle_session = framework.create_session(service_config())
        oracle_session.run()

        authority = InteractiveAuthority(timeout=10.0)
        session = framework.create_session(service_config(), authority=authority)
        runner = SessionRunner(session, authority, autostart=True)
        client = TestClient(create_app(runner))
        try:
            drive_to_completion(client, session)
            assert session.event_log_text() == oracle_session.event_log_text()
            assert session.metrics_csv() == oracle_session.metrics_csv()
        finally:
            runner.stop()
