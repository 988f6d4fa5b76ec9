"""Command-line front end: certificate round-trips, conservative decimal
serialization, verification culprits, pipeline orchestration, and exit
codes."""

import copy
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freudcaps import cli
from freudcaps.cli import (EXIT_INPUT, EXIT_OK, EXIT_VERDICT, PipelineConfig,
                           check_certificate, ivl_json, ivl_unjson,
                           run_pipeline, verify_certificate)
from freudcaps.ivlmath import PrecisionContext

CTX = PrecisionContext(256)

fractions = st.fractions(min_value=-10**6, max_value=10**6,
                         max_denominator=10**9)


@pytest.fixture(scope="module")
def sample_cert(tmp_path_factory):
    """A real (cheap) certificate: closed-form compactness stage only."""
    out = tmp_path_factory.mktemp("cert") / "cert.json"
    cfg = PipelineConfig(stages=("compact",))
    run_pipeline(cfg, out=str(out))
    return out


class TestSerialization:
    @given(fractions)
    @settings(max_examples=40)
    def test_conservative(self, q):
        x = CTX.ivl(q)
        d = ivl_json(x)
        y = ivl_unjson(d, CTX)
        assert y.lo <= x.lo and x.hi <= y.hi

    def test_json_roundtrip_idempotent(self, sample_cert):
        first = json.loads(sample_cert.read_text())
        again = json.dumps(first, indent=2, sort_keys=False)
        assert json.loads(again) == first


class TestVerification:
    def test_fresh_certificate_ok(self, sample_cert):
        assert verify_certificate(sample_cert)

    def test_theta_tamper(self, sample_cert):
        cert = json.loads(sample_cert.read_text())
        cert["constants"]["theta"] = {"lo": "1.1", "hi": "1.1"}
        ok, culprit = check_certificate(cert)
        assert not ok and culprit == "theta < 1"

    def test_C_tamper(self):
        cert = {"version": "1", "constants": {
            "C12": {"lo": "0.30", "hi": "0.31"},
            "C22": {"lo": "1.18", "hi": "1.19"},
            "C": {"lo": "0.5", "hi": "0.6"}}}
        ok, culprit = check_certificate(cert)
        assert not ok and culprit.startswith("C >=")

    def test_inverted_interval(self):
        cert = {"version": "1",
                "constants": {"theta": {"lo": "0.5", "hi": "0.2"}}}
        ok, culprit = check_certificate(cert)
        assert not ok and "lo <= hi" in culprit

    def test_gp_contraction_recheck(self):
        gp = {"success": True,
              "Y": {"lo": "1e-7", "hi": "1e-7"},
              "Z1": {"lo": "0.1", "hi": "0.1"},
              "Z2": {"lo": "0.01", "hi": "0.01"},
              "Z3": {"lo": "1e-4", "hi": "1e-4"},
              "delta_lo": {"lo": "1.2e-7", "hi": "1.3e-7"},
              "delta_hi": {"lo": "1.0", "hi": "1.0"}}
        ok, culprit = check_certificate({"version": "1", "gp": gp})
        assert ok, culprit
        bad = copy.deepcopy(gp)
        bad["Z1"] = {"lo": "0.999999", "hi": "0.9999999"}
        ok, culprit = check_certificate({"version": "1", "gp": bad})
        assert not ok

    def test_failure_marker_fails(self):
        ok, culprit = check_certificate(
            {"version": "1", "failure": {"stage": "quad", "error": "x"}})
        assert not ok and "quad" in culprit


class TestPipeline:
    def test_empty_stage_list_rejected(self):
        with pytest.raises(ValueError):
            run_pipeline(PipelineConfig(stages=()))

    def test_unknown_stage_rejected(self):
        with pytest.raises(ValueError):
            run_pipeline(PipelineConfig(stages=("warp",)))

    def test_append_semantics(self, tmp_path):
        out = tmp_path / "cert.json"
        run_pipeline(PipelineConfig(stages=("compact",)), out=str(out))
        run_pipeline(PipelineConfig(stages=("quad",), quad_m=(4,),
                                    quad_nodes=24, bits=256), out=str(out))
        cert = json.loads(out.read_text())
        assert "constants" in cert and "quadrature" in cert

    def test_painleve_stage_thresholds(self, tmp_path):
        out = tmp_path / "cert.json"
        cert = run_pipeline(PipelineConfig(stages=("painleve",)),
                            out=str(out))
        assert cert["thresholds"]["N"] == 2187
        assert cert["thresholds"]["N2"] == 9215
        assert verify_certificate(out)


class TestExitCodes:
    def test_input_error(self, capsys):
        assert cli.main(["verify", "/nonexistent/path.json"]) == EXIT_INPUT

    def test_argparse_error_is_input_error(self):
        with pytest.raises(SystemExit) as ei:
            cli.main(["painleve", "--badflag"])
        assert ei.value.code == EXIT_INPUT

    def test_verify_ok_and_verdict(self, sample_cert, tmp_path, capsys):
        assert cli.main(["verify", str(sample_cert)]) == EXIT_OK
        cert = json.loads(sample_cert.read_text())
        cert["constants"]["theta"] = {"lo": "2", "hi": "2"}
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(cert))
        assert cli.main(["verify", str(bad)]) == EXIT_VERDICT

    def test_malformed_json_is_input_error(self, tmp_path):
        bad = tmp_path / "garbage.json"
        bad.write_text("{not json")
        assert cli.main(["verify", str(bad)]) == EXIT_INPUT


class TestCoeffsCommand:
    def test_writes_coefficient_file(self, tmp_path, capsys):
        out = tmp_path / "a.txt"
        code = cli.main(["--out", str(out), "coeffs", "--kappa", "4",
                         "--length", "10"])
        assert code == EXIT_OK
        lines = [l for l in out.read_text().splitlines() if l.strip()]
        assert len(lines) == 11
        n, lo, hi = lines[3].split()
        assert int(n) == 3 and Fraction(lo) <= Fraction(hi)
