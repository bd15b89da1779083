import time

import pytest
from starlette.testclient import TestClient

from sivgrip.feedback import load_replay_log
from sivgrip.replay import replay_session_log, split_session_log
from sivgrip.session import SessionConfig, create_app

START_CONFIG = {
    "variant": "siv",
    "env": {"grip_sizes": [0.3, 0.9], "object_sizes": [0.2, 0.9], "travel_steps": 3},
    "preferences": [[0.2, 0], [0.9, 1]],
    "seed": 7,
}


class Client:
    """Tiny wrapper tracking the outbound sequence number."""

    def __init__(self, websocket, session_id):
        self.websocket = websocket
        self.session_id = session_id
        self.seq = 0

    def send(self, tag, payload=True):
        self.seq += 1
        self.websocket.send_json({"session": self.session_id, "seq": self.seq, tag: payload})

    def recv(self, tag, timeout_frames=200):
        for _ in range(timeout_frames):
            frame = self.websocket.receive_json()
            if tag in frame:
                return frame[tag]
        raise AssertionError(f"no {tag} frame arrived")


@pytest.fixture()
def app(tmp_path):
    return create_app(log_dir=tmp_path)


def start_session(websocket, session_id, config=None):
    client = Client(websocket, session_id)
    client.send("start", config or START_CONFIG)
    client.recv("state")
    return client


def test_session_runs_ticks_and_broadcasts_state(app):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s1") as websocket:
            client = start_session(websocket, "s1")
            payload = client.recv("state")
            assert payload["p"] >= 0
            assert payload["travel_steps"] == 3
            assert isinstance(payload["mask"], list) and payload["mask"]
            later = client.recv("state")
            assert later["tick"] >= payload["tick"]
            client.send("stop")
            summary = client.recv("session_summary")
            assert summary["reason"] == "stopped"
            assert summary["ticks"] > 0


def test_second_client_rejected(app):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s2") as first:
            start_session(first, "s2")
            with http.websocket_connect("/ws/s2") as second:
                frame = second.receive_json()
                assert "error" in frame
                assert "already has a client" in frame["error"]


def test_malformed_json_gets_error_and_session_continues(app):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s3") as websocket:
            client = start_session(websocket, "s3")
            websocket.send_text("{not json")
            error = client.recv("error")
            assert "malformed" in error
            # session still alive: state frames keep flowing
            assert client.recv("state")["tick"] >= 0
            client.send("stop")
            client.recv("session_summary")


def test_unknown_tag_rejected(app):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s4") as websocket:
            client = start_session(websocket, "s4")
            client.seq += 1
            websocket.send_json({"session": "s4", "seq": client.seq, "wiggle": 1})
            assert "exactly one known tag" in client.recv("error")
            client.send("stop")
            client.recv("session_summary")


def test_stale_sequence_number_rejected(app):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s5") as websocket:
            client = start_session(websocket, "s5")
            websocket.send_json({"session": "s5", "seq": 0, "push": True})
            assert "monotone" in client.recv("error")
            client.send("stop")
            client.recv("session_summary")


def test_push_consumed_exactly_once(app):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s6") as websocket:
            client = start_session(websocket, "s6")
            client.recv("state")
            client.send("push")
            rewards = []
            for _ in range(12):
                payload = client.recv("state")
                rewards.append(payload["last_reward"])
            assert rewards.count(-1.0) == 1
            client.send("stop")
            client.recv("session_summary")


def test_gesture_hold_enters_siv_observation(app, tmp_path):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s7") as websocket:
            client = start_session(websocket, "s7")
            client.send("gesture", {"roll_deg": -90.0, "present": True})
            time.sleep(0.35)
            client.send("stop")
            client.recv("session_summary")
    # step records' feature vectors hold the thumbs-up value from the
    # gesture's arrival until the end (zero-order hold)
    log = load_replay_log(tmp_path / "s7.ndjson")
    _, steps, _ = split_session_log(log)
    gesture_t = log.samples[0].t_ms
    after = [rec for rec in steps if rec["t_ms"] >= gesture_t + 100]
    assert after, "session too short to observe the held gesture"
    assert all(rec["phi"][1] == 1.0 for rec in after)
    before = [rec for rec in steps if rec["t_ms"] < gesture_t]
    assert all(rec["phi"][1] == -1.0 for rec in before)


def test_tick_rate_is_soft_real_time(app):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s8") as websocket:
            client = start_session(websocket, "s8")
            time.sleep(1.5)
            client.send("stop")
            summary = client.recv("session_summary")
    # 15 ticks nominal over 1.5 s; allow generous scheduling slack
    assert 10 <= summary["ticks"] <= 20


def test_session_log_is_replayable_bit_exact(app, tmp_path):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s9") as websocket:
            client = start_session(websocket, "s9")
            client.send("gesture", {"roll_deg": -90.0, "present": True})
            time.sleep(0.4)
            client.send("gesture", {"roll_deg": 0.0, "present": True})
            client.send("push")
            time.sleep(0.4)
            client.send("stop")
            client.recv("session_summary")
    report = replay_session_log(tmp_path / "s9.ndjson")
    assert report.ticks > 0
    assert report.ok, report.divergences


def test_session_log_contains_inbound_events_and_steps(app, tmp_path):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s10") as websocket:
            client = start_session(websocket, "s10")
            client.send("gesture", {"roll_deg": -90.0, "present": True})
            client.send("push")
            time.sleep(0.4)
            client.send("stop")
            client.recv("session_summary")
    log = load_replay_log(tmp_path / "s10.ndjson")
    assert len(log.samples) == 1
    assert len(log.pushes) == 1
    header, steps, summary = split_session_log(log)
    assert header["config"]["variant"] == "siv"
    assert steps, "step records must be logged"
    assert summary is not None
    assert summary["final_weights"]["version"] == 1


def test_session_config_validation():
    with pytest.raises(Exception):
        SessionConfig.from_payload({"variant": "bogus"})
    config = SessionConfig.from_payload(START_CONFIG)
    assert config.variant == "siv"
    assert config.env.travel_steps == 3


def test_health_endpoint_lists_sessions(app):
    with TestClient(app) as http:
        assert http.get("/health").json() == {"ok": True, "sessions": []}


def test_q_values_hidden_unless_debug_flag_set(app):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s14") as websocket:
            client = start_session(websocket, "s14")
            payload = client.recv("state")
            assert "q" not in payload
            client.send("stop")
            client.recv("session_summary")
        with http.websocket_connect("/ws/s15") as websocket:
            client = start_session(websocket, "s15", {**START_CONFIG, "show_q": True})
            payload = client.recv("state")
            assert isinstance(payload["q"], list)
            assert len(payload["q"]) == 4  # 2 grips + forward + backward
            client.send("stop")
            client.recv("session_summary")


def test_heartbeat_frames_arrive_every_second(app):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s11") as websocket:
            client = start_session(websocket, "s11")
            beat = client.recv("heartbeat", timeout_frames=40)
            assert beat["tick"] >= 0
            client.send("stop")
            client.recv("session_summary")


def test_disconnect_pauses_and_reconnect_resumes(app):
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s12") as websocket:
            client = start_session(websocket, "s12")
            first = client.recv("state")
        # client gone: the environment freezes
        time.sleep(0.4)
        session = app.state.manager.sessions["s12"]
        frozen_tick = session.tick_index
        time.sleep(0.3)
        assert session.tick_index == frozen_tick, "ticks must not advance while paused"
        # same session id reconnects and the loop continues where it stopped
        with http.websocket_connect("/ws/s12") as websocket:
            client = Client(websocket, "s12")
            client.seq = 10  # fresh client keeps its own numbering monotone
            resumed = client.recv("state")
            assert resumed["tick"] >= first["tick"]
            client.send("stop")
            client.recv("session_summary")


def test_abandoned_session_aborts_after_grace(app, tmp_path, monkeypatch):
    import sivgrip.session as session_module

    monkeypatch.setattr(session_module, "RECONNECT_GRACE_S", 0.3)
    with TestClient(app) as http:
        with http.websocket_connect("/ws/s13") as websocket:
            client = start_session(websocket, "s13")
            client.recv("state")
        deadline = time.time() + 5.0
        session = app.state.manager.sessions["s13"]
        while not session.closed and time.time() < deadline:
            time.sleep(0.1)
        assert session.closed, "session must abort after the reconnect grace"
    log = load_replay_log(tmp_path / "s13.ndjson")
    _, _, summary = split_session_log(log)
    assert summary is not None
    assert summary["reason"] == "client never reconnected"
