#!/usr/bin/env python3
"""
Tests for SVG chart rendering.
"""

import pytest

from src.core.errors import InvalidArgumentError
from src.reporting.svg_charts import render_line_chart, write_svg


def test_chart_contains_one_polyline_per_series(tmp_path):
    svg = render_line_chart(
        {"ViT": ([1, 2, 3], [0.9, 0.5, 0.3]), "Swin": ([1, 2, 3], [0.9, 0.9, 0.9])},
        "ECPE vs contrast factor", "contrast factor", "ECPE",
    )
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<polyline") == 2
    assert "ECPE vs contrast factor" in svg
    path = write_svg(svg, tmp_path / "charts" / "ecpe.svg")
    assert path.read_text() == svg


def test_chart_is_deterministic_and_escaped():
    series = {"a<b": ([0.0], [1.0])}
    first = render_line_chart(series, "t & u", "x", "y")
    assert first == render_line_chart(series, "t & u", "x", "y")
    assert "a&lt;b" in first and "t &amp; u" in first


@pytest.mark.parametrize("series", [{}, {"bad": ([1, 2], [1])}, {"empty": ([], [])}])
def test_chart_rejects_bad_series(series):
    with pytest.raises(InvalidArgumentError):
        render_line_chart(series, "t", "x", "y")
