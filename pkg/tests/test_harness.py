import numpy as np
import pytest
from dataclasses import replace
from numpy.testing import assert_allclose

from se3est.cli import main
from se3est.errors import ParseError, RankDeficient
from se3est.harness import (LOG_COLUMNS, EstimatorSettings, ExperimentConfig,
                            RunLog, RunRecord, SensorConfig, load_config,
                            read_log, reference_config, run_experiment,
                            save_config, truth_log, write_log)
from se3est.liegroups import Pose, Twist, exp_so3
from se3est.sensors import BeaconMap, NoiseModel, cube_vertex_map, planar_rig
from se3est.truthsim import SimConfig, TrueState, make_wrench


def no_noise(config: ExperimentConfig) -> ExperimentConfig:
    noise = replace(config.sensors.noise, bump_width=0.0, velocity_width=0.0,
                    gyro_width=0.0)
    return replace(config, sensors=replace(config.sensors, noise=noise))


def screw_config(duration=20.0, dt=0.02) -> ExperimentConfig:
    """Constant-twist truth (spin and climb about one principal axis) with the
    estimator started exactly on it; the discrete filter has no excuse to move."""
    base = reference_config()
    xi = Twist(np.array([0.0, 0.0, 0.3]), np.array([0.0, 0.0, 0.02]))
    sim = SimConfig(dt=dt, duration=duration, body=base.sim.body,
                    wrench=make_wrench("zero"),
                    initial=TrueState(Pose.identity(), xi), wrench_name="zero")
    est = EstimatorSettings(gains=base.estimator.gains, velocity_mode="points",
                            butterworth=False, cutoff_hz=5.0, g0=Pose.identity(),
                            omega0_hat=xi.omega, nu0_hat=xi.nu)
    return no_noise(ExperimentConfig(sim=sim, sensors=base.sensors, estimator=est))


class TestReferenceConfig:
    def test_published_values(self):
        cfg = reference_config()
        assert cfg.sim.dt == 0.02
        assert cfg.sim.duration == 20.0
        assert cfg.sim.body.mass == 0.420
        assert_allclose(np.diag(cfg.sim.body.inertia), [0.0512, 0.0602, 0.0596])
        assert_allclose(np.diag(cfg.estimator.gains.J), [0.9, 0.6, 0.3])
        assert_allclose(np.diag(cfg.estimator.gains.M), [0.0608, 0.0486, 0.0365])
        assert_allclose(np.diag(cfg.estimator.gains.Dr), [2.7, 2.2, 1.5])
        assert_allclose(np.diag(cfg.estimator.gains.Dt), [0.1, 0.12, 0.14])
        assert_allclose(cfg.sensors.inertial_dirs[0], [0, 0, -1])
        assert_allclose(cfg.sensors.inertial_dirs[1], [0.1, 0.975, -0.2])
        assert cfg.sensors.noise.bump_width == 0.001
        assert cfg.estimator.velocity_mode == "points"
        assert_allclose(cfg.estimator.omega0_hat, [0.1, 0.45, 0.05])
        assert_allclose(cfg.estimator.nu0_hat, [2.05, 0.64, 1.29])

    def test_wrench_profile_values(self):
        w = reference_config().sim.wrench
        t = 3.7
        assert_allclose(w.force_fn(t), 1e-3 * np.array(
            [10 * np.cos(0.1 * t), 2 * np.sin(0.2 * t), -2 * np.sin(0.5 * t)]))
        assert_allclose(w.torque_fn(t), 1e-6 * w.force_fn(t))


class TestRunExperiment:
    def test_record_count(self):
        log = run_experiment(reference_config())
        assert len(log.records) == 1001

    def test_one_step_equilibrium(self):
        cfg = screw_config(duration=0.02)
        log = run_experiment(cfg)
        assert len(log.records) == 2
        assert max(log.records[-1].errors) < 1e-9

    def test_determinism_bit_identical(self, tmp_path):
        cfg = reference_config()
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_log(run_experiment(cfg), p1)
        write_log(run_experiment(cfg), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_seed_changes_noise(self):
        cfg = reference_config()
        other = replace(cfg, sensors=replace(cfg.sensors,
                                             noise=replace(cfg.sensors.noise, seed=7)))
        a = run_experiment(cfg).records[-1].errors
        b = run_experiment(other).records[-1].errors
        assert a != b

    def test_velocity_modes_agree_without_noise(self):
        cfg = no_noise(reference_config())
        finals = {}
        for mode in ("direct", "gyro", "points"):
            c = replace(cfg, estimator=replace(cfg.estimator, velocity_mode=mode))
            finals[mode] = np.array(run_experiment(c).records[-1].errors)
        assert_allclose(finals["direct"], finals["points"], atol=1e-9)
        assert_allclose(finals["gyro"], finals["points"], atol=1e-9)

    def test_butterworth_path_still_converges(self):
        cfg = no_noise(reference_config())
        cfg = replace(cfg, estimator=replace(cfg.estimator, butterworth=True))
        log = run_experiment(cfg)
        assert log.records[-1].errors[0] < 0.05
        assert log.records[-1].errors[1] < 0.05

    def test_numerical_failure_carries_step_index(self):
        # A single visible beacon cannot determine the twist by points.
        base = reference_config()
        sensors = SensorConfig(
            beacons=BeaconMap(((1, np.array([8.0, 0.0, 0.0])),)),
            rig=base.sensors.rig, inertial_dirs=base.sensors.inertial_dirs,
            noise=base.sensors.noise)
        cfg = replace(base, sensors=sensors)
        with pytest.raises(RankDeficient, match="step 0"):
            run_experiment(cfg)


class TestTruthLog:
    def test_mirrors_truth(self):
        cfg = screw_config(duration=0.1)
        log = truth_log(cfg)
        for r in log.records:
            assert_allclose(r.est_pose.matrix(), r.truth.pose.matrix())
            assert r.errors == (0.0, 0.0, 0.0, 0.0)
            assert r.n_visible == 8


class TestLogRoundTrip:
    def test_empty_log(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_log(RunLog(records=[]), path)
        assert path.read_text().strip() == ",".join(LOG_COLUMNS)
        assert read_log(path).records == []

    def test_three_record_round_trip(self, tmp_path):
        log = run_experiment(screw_config(duration=0.04))
        path = tmp_path / "log.csv"
        write_log(log, path)
        back = read_log(path)
        assert len(back.records) == len(log.records)
        for a, b in zip(log.records, back.records):
            assert a.t == b.t
            assert np.array_equal(a.truth.pose.rotation, b.truth.pose.rotation)
            assert np.array_equal(a.truth.pose.position, b.truth.pose.position)
            assert np.array_equal(a.est_pose.rotation, b.est_pose.rotation)
            assert np.array_equal(a.est_twist.as_array(), b.est_twist.as_array())
            assert a.errors == b.errors
            assert a.n_visible == b.n_visible and a.newton_iters == b.newton_iters

    def test_parse_errors_carry_line_numbers(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(LOG_COLUMNS) + "\n1,2,3\n")
        with pytest.raises(ParseError, match=":2"):
            read_log(path)
        path.write_text("nonsense\n")
        with pytest.raises(ParseError, match=":1"):
            read_log(path)


class TestConfigFile:
    def test_save_load_round_trip(self, tmp_path):
        cfg = reference_config()
        path = tmp_path / "exp.cfg"
        save_config(cfg, path)
        loaded = load_config(path)
        assert loaded.sim.dt == cfg.sim.dt
        assert_allclose(loaded.sim.initial.pose.rotation,
                        cfg.sim.initial.pose.rotation, atol=1e-15)
        assert_allclose(np.diag(loaded.estimator.gains.Dr),
                        np.diag(cfg.estimator.gains.Dr))
        assert loaded.estimator.velocity_mode == cfg.estimator.velocity_mode
        assert loaded.sensors.noise.bump_width == cfg.sensors.noise.bump_width

    def test_override_single_key(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("sim.dt = 0.01\nsensors.seed = 42\n")
        cfg = load_config(path)
        assert cfg.sim.dt == 0.01
        assert cfg.sensors.noise.seed == 42
        assert cfg.sim.duration == 20.0  # untouched default

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("# comment\nsim.dtt = 0.01\n")
        with pytest.raises(ParseError, match=":2"):
            load_config(path)

    def test_bad_value_rejected(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("sim.b0 = 1 2\n")
        with pytest.raises(ParseError, match="sim.b0"):
            load_config(path)
        path.write_text("estimator.velocity_mode = teleport\n")
        with pytest.raises(ParseError):
            load_config(path)

    def test_missing_equals_rejected(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("sim.dt 0.01\n")
        with pytest.raises(ParseError, match=":1"):
            load_config(path)


class TestCli:
    def test_run_and_simulate(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text("sim.duration = 0.1\nsensors.seed = 3\n")
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert (out / "run.csv").exists()
        assert len(read_log(out / "run.csv").records) == 6
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert (out / "truth.csv").exists()

    def test_no_noise_flag_gives_clean_measurements(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text("sim.duration = 0.5\n")
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", str(cfg_path), "--out", str(out_a),
                     "--no-noise", "--seed", "1"]) == 0
        assert main(["run", "--config", str(cfg_path), "--out", str(out_b),
                     "--no-noise", "--seed", "2"]) == 0
        assert (out_a / "run.csv").read_bytes() == (out_b / "run.csv").read_bytes()

    def test_config_error_exit_code(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text("sim.dt = -1\n")
        assert main(["run", "--config", str(cfg_path),
                     "--out", str(tmp_path / "o")]) == 2

    def test_numerical_error_exit_code(self, tmp_path, capsys):
        cfg_path = tmp_path / "exp.cfg"
        # Coincident beacons + exact measurements: the twist solve is singular.
        cfg_path.write_text("sensors.cube_side = 1e-9\nsim.duration = 0.1\n")
        code = main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "o"),
                     "--no-noise"])
        assert code == 3
        assert "step" in capsys.readouterr().err

    def test_sweep_noise_widths(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text("sim.duration = 0.1\n")
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(cfg_path), "--out", str(out),
                     "--noise-widths", "0,0.001"]) == 0
        assert (out / "run_width0.csv").exists()
        assert (out / "run_width0.001.csv").exists()

    def test_sweep_dt_values(self, tmp_path):
        out = tmp_path / "sweep"
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text("sim.duration = 0.1\n")
        assert main(["sweep", "--config", str(cfg_path), "--out", str(out),
                     "--dt-values", "0.02,0.01"]) == 0
        assert len(read_log(out / "run_dt0.02.csv").records) == 6
        assert len(read_log(out / "run_dt0.01.csv").records) == 11

    def test_write_config(self, tmp_path):
        path = tmp_path / "ref.cfg"
        assert main(["write-config", "--out", str(path)]) == 0
        cfg = load_config(path)
        assert cfg.sim.dt == 0.02
