import numpy as np
import pytest

from faceaes import EvalReport, GaTrace, SweepRow
from faceaes.report import (
    render_eval_summary,
    render_sweep_table,
    save_rounds_figure,
    save_sweep_figure,
    save_trace_figure,
    write_sweep_csv,
)


def mk_report(metric_name="gcr", mean=0.85, std=0.02, predictor="linear",
              mean_selected=None):
    return EvalReport(
        task="classification" if metric_name == "gcr" else "regression",
        predictor=predictor,
        feature_set="IQ",
        metric_name=metric_name,
        metric_mean=mean,
        metric_std=std,
        round_means=[mean - std, mean + std],
        fold_metrics=[[mean - std] * 3, [mean + std] * 3],
        selected_counts=[[4, 5, 6]] if predictor == "ga" else [],
        mean_selected=mean_selected,
        rounds=2,
        n_folds=3,
        n_samples=30,
        dim=10,
        master_seed=0,
    )


def mk_rows():
    return [
        SweepRow(blocks=("IQ",), predictor="linear", n_features=4096,
                 report=mk_report(mean=0.80)),
        SweepRow(blocks=("FA",), predictor="linear", n_features=2048,
                 report=mk_report(mean=0.82)),
        SweepRow(blocks=("IQ", "FA"), predictor="linear", n_features=6144,
                 report=mk_report(mean=0.86)),
        SweepRow(blocks=("IQ", "FA"), predictor="ga", n_features=6144,
                 report=mk_report(mean=0.90, predictor="ga",
                                  mean_selected=4210.4)),
    ]


class TestSweepTable:
    def test_layout(self):
        text = render_sweep_table(mk_rows())
        lines = text.strip().splitlines()
        assert len(lines) == 6  # header, rule, 4 rows
        assert lines[0].split() == ["IQ", "FA", "#features", "GA", "GCR"]
        assert set(lines[1]) <= {"-", " "}

    def test_membership_marks(self):
        lines = render_sweep_table(mk_rows()).strip().splitlines()
        assert lines[2].split()[:2] == ["x", "4096"]  # IQ only: FA cell empty
        assert lines[3].split()[:2] == ["x", "2048"]  # FA only: IQ cell empty
        assert not lines[3].startswith("x")  # the mark sits in the FA column
        assert lines[4].count("x") == 2  # IQ + FA, no GA mark
        assert lines[5].count("x") == 3  # IQ + FA + GA mark

    def test_ga_row_shows_mean_popcount(self):
        lines = render_sweep_table(mk_rows()).strip().splitlines()
        assert "4210" in lines[5]
        assert "6144" not in lines[5]
        assert "6144" in lines[4]

    def test_metric_formatting(self):
        text = render_sweep_table(mk_rows())
        assert "0.8000 +- 0.0200" in text

    def test_empty_rows_rejected(self):
        with pytest.raises(ValueError):
            render_sweep_table([])


class TestSweepCsv:
    def test_contents(self, tmp_path):
        path = tmp_path / "sweep.csv"
        write_sweep_csv(mk_rows(), path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == ("IQ,FA,n_features,ga,mean_selected,"
                            "metric_name,metric_mean,metric_std")
        assert lines[1].startswith("1,0,4096,0,")
        assert lines[2].startswith("0,1,2048,0,")
        assert lines[3].startswith("1,1,6144,0,")
        assert lines[4].startswith("1,1,6144,1,4210.4,")
        # repr floats survive a parse round trip exactly
        assert float(lines[1].split(",")[6]) == 0.80

    def test_rerun_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_sweep_csv(mk_rows(), a)
        write_sweep_csv(mk_rows(), b)
        assert a.read_bytes() == b.read_bytes()


class TestEvalSummary:
    def test_linear_summary(self):
        text = render_eval_summary(mk_report())
        assert "task:       classification" in text
        assert "GCR" in text and "0.8500" in text
        assert "selected" not in text

    def test_ga_summary_mentions_selection(self):
        text = render_eval_summary(mk_report(predictor="ga", mean_selected=5.0))
        assert "selected:   5.0 features on average" in text

    def test_regression_label(self):
        assert "LCC" in render_eval_summary(mk_report(metric_name="lcc"))


class TestFigures:
    def test_sweep_figure_written(self, tmp_path):
        path = tmp_path / "sweep.png"
        save_sweep_figure(mk_rows(), path)
        data = path.read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"
        assert len(data) > 1000

    def test_rounds_figure_written(self, tmp_path):
        path = tmp_path / "rounds.png"
        save_rounds_figure(mk_report(), path)
        assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_trace_figure_written(self, tmp_path):
        trace = GaTrace(
            best_fitness=np.array([1.0, 0.6, 0.4]),
            mean_fitness=np.array([2.0, 1.1, 0.9]),
            best_selected=np.array([8, 7, 6]),
        )
        save_trace_figure(trace, tmp_path / "trace.png")
        assert (tmp_path / "trace.png").stat().st_size > 1000

    def test_trace_figure_handles_zero_fitness(self, tmp_path):
        trace = GaTrace(
            best_fitness=np.array([1.0, 0.5, 0.0]),
            mean_fitness=np.array([2.0, 1.0, 0.2]),
            best_selected=np.array([8, 7, 6]),
        )
        save_trace_figure(trace, tmp_path / "trace.png")
        assert (tmp_path / "trace.png").exists()

    def test_png_rerun_bit_identical(self, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        save_rounds_figure(mk_report(), a)
        save_rounds_figure(mk_report(), b)
        assert a.read_bytes() == b.read_bytes()
