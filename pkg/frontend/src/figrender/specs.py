"""Panel layouts and series-to-panel maps for the figure bundles.

Each figure is a grid of panels; each panel draws one or more series, and a
series names the bundle file it comes from, the CSV column (or derived
quantity) and its color.  Colors follow the captions: nonadiabatic vs
adiabatic in orange vs blue, steady-state companions in red vs light blue,
the weakly driven comparison in green vs orange.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Series:
    file_tag: str          # "T2000_nonadiabatic" or "T10" (delta_g bundles)
    column: str            # CSV column, or "x_minus_lambda"
    color: str
    label: str


@dataclass(frozen=True)
class Panel:
    title: str
    ylabel: str
    series: tuple


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    rows: int
    cols: int
    panels: tuple          # row-major, length rows*cols
    sharex: bool = True


_SPEED_ORDER = {
    "fig1": ["T10", "T20", "T200", "T2000"],
    "fig2": ["T2000", "T200", "T20", "T10"],
    "fig3": ["T100", "T20", "T10", "T5"],
    "fig5": ["T2000", "T200", "T20", "T10"],
    "appD1": ["T2000", "T200", "T20", "T10"],
    "appD2": ["T2000", "T200", "T20", "T10"],
}

_NONAD = "tab:orange"
_AD = "tab:blue"
_NONAD_SS = "lightblue"
_AD_SS = "tab:red"
_WD = "tab:orange"
_NONAD_VS_WD = "tab:green"


def _two_variant_rows(figure_id, tags, variants, colors, row_columns, row_labels):
    panels = []
    for column, ylabel in zip(row_columns, row_labels):
        for tag in tags:
            series = tuple(
                Series(file_tag=f"{tag}_{variant}", column=column, color=color, label=variant)
                for variant, color in zip(variants, colors)
            )
            panels.append(Panel(title=tag.replace("T", "wT = "), ylabel=ylabel, series=series))
    return FigureSpec(figure_id=figure_id, rows=len(row_columns), cols=len(tags), panels=tuple(panels))


def build_specs() -> dict:
    specs = {}

    tags1 = _SPEED_ORDER["fig1"]
    specs["fig1"] = FigureSpec(
        figure_id="fig1",
        rows=2,
        cols=1,
        panels=(
            Panel(
                title="nonadiabatic driving correction",
                ylabel="Re dg / w",
                series=tuple(
                    Series(file_tag=t, column="dg_re_over_omega", color=f"C{i}", label=t.replace("T", "wT = "))
                    for i, t in enumerate(tags1)
                ),
            ),
            Panel(
                title="",
                ylabel="-Im dg / w",
                series=tuple(
                    Series(file_tag=t, column="dg_neg_im_over_omega", color=f"C{i}", label=t.replace("T", "wT = "))
                    for i, t in enumerate(tags1)
                ),
            ),
        ),
    )

    specs["fig2"] = _two_variant_rows(
        "fig2",
        _SPEED_ORDER["fig2"],
        ("nonadiabatic", "adiabatic"),
        (_NONAD, _AD),
        ("x_minus_lambda", "p"),
        ("<x> - lambda", "<p>"),
    )

    tags3 = _SPEED_ORDER["fig3"]
    specs["fig3"] = FigureSpec(
        figure_id="fig3",
        rows=1,
        cols=4,
        panels=tuple(
            Panel(
                title=tag.replace("T", "wT = "),
                ylabel="E / hw",
                series=(
                    Series(f"{tag}_nonadiabatic", "energy", _NONAD, "nonadiabatic"),
                    Series(f"{tag}_adiabatic", "energy", _AD, "adiabatic"),
                ),
            )
            for tag in tags3
        ),
    )

    specs["fig4"] = FigureSpec(
        figure_id="fig4",
        rows=1,
        cols=1,
        panels=(
            Panel(
                title="entropy (driving independent)",
                ylabel="S_vN",
                series=(Series("T20_nonadiabatic", "entropy", _AD, "S_vN"),),
            ),
        ),
    )

    panels5 = []
    for columns, colors, ylabel in (
        (("c_energy", "c_energy", "c_ss", "c_ss"), (_AD, _NONAD, _NONAD_SS, _AD_SS), "coherence"),
        (("f_gibbs", "f_gibbs", "f_ss", "f_ss"), (_AD, _NONAD, _NONAD_SS, _AD_SS), "fidelity"),
    ):
        variants = ("nonadiabatic", "adiabatic", "nonadiabatic", "adiabatic")
        for tag in _SPEED_ORDER["fig5"]:
            series = tuple(
                Series(f"{tag}_{variant}", column, color, f"{column} {variant}")
                for variant, column, color in zip(variants, columns, colors)
            )
            panels5.append(Panel(title=tag.replace("T", "wT = "), ylabel=ylabel, series=series))
    specs["fig5"] = FigureSpec(figure_id="fig5", rows=2, cols=4, panels=tuple(panels5))

    for fid in ("appD1", "appD2"):
        specs[fid] = _two_variant_rows(
            fid,
            _SPEED_ORDER[fid],
            ("nonadiabatic", "weakly_driven"),
            (_NONAD_VS_WD, _WD),
            ("x_minus_lambda", "p"),
            ("<x> - lambda", "<p>"),
        )

    return specs


FIGURE_SPECS = build_specs()
