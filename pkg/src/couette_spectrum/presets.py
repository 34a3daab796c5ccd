"""Run configuration and the named scenario presets.

Each preset encodes one of the standard numerical experiments: single-seed
equilibration, sideband decay, the seeded selection sweep, two-mode
competition, long-wave excitation, broad-band selection, the per-wavenumber
torque table, and the torque-vs-Reynolds sweep.
"""

from dataclasses import asdict, dataclass, field

import yaml

from .errors import ConfigError


@dataclass(frozen=True)
class FlowSection:
    eta: float = 0.5
    mu: float = 0.0
    reynolds: float = 88.1


@dataclass(frozen=True)
class GridSection:
    n_points: int = 48
    k_max: float = 12.0
    dk: float = 0.25


@dataclass(frozen=True)
class EvolutionSection:
    dt: float = 0.01
    picard_tol: float = 1e-10
    picard_max: int = 50
    equil_tol: float = 1e-8
    t_max: float = 60.0
    snapshot_every: int = 50


@dataclass(frozen=True)
class InitialSection:
    seeds: tuple = ()          # ((k, density), ...)
    uniform: float | None = None
    background: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "custom"
    flow: FlowSection = field(default_factory=FlowSection)
    grid: GridSection = field(default_factory=GridSection)
    evolution: EvolutionSection = field(default_factory=EvolutionSection)
    initial: InitialSection = field(default_factory=InitialSection)
    sweep_seeds: tuple = ()      # selection-sweep seed list (fig4/table1)
    sweep_background: float = 0.0
    reynolds_sweep: tuple = ()   # torque-vs-Reynolds sweep (fig7)
    output_dir: str = "runs/out"

    def validate(self):
        g = self.grid
        if g.k_max <= 0 or g.dk <= 0 or abs(round(g.k_max / g.dk) * g.dk - g.k_max) > 1e-9:
            raise ConfigError("k_max must be a positive multiple of dk")
        for k, dens in self.initial.seeds:
            j = round(float(k) / g.dk)
            if abs(j * g.dk - k) > 1e-9 or abs(k) > g.k_max + 1e-9:
                raise ConfigError(f"seed wavenumber {k} not on the k-grid")
            if abs(dens) < 0:
                raise ConfigError("seed densities must have nonnegative magnitude")
        if self.initial.uniform is not None and self.initial.uniform < 0:
            raise ConfigError("uniform density must be nonnegative")
        if self.initial.background < 0:
            raise ConfigError("background level must be nonnegative")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["initial"]["seeds"] = [list(s) for s in self.initial.seeds]
        d["sweep_seeds"] = list(self.sweep_seeds)
        d["reynolds_sweep"] = list(self.reynolds_sweep)
        return d

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        try:
            return cls(
                scenario=d.get("scenario", "custom"),
                flow=FlowSection(**d.get("flow", {})),
                grid=GridSection(**d.get("grid", {})),
                evolution=EvolutionSection(**d.get("evolution", {})),
                initial=InitialSection(
                    seeds=tuple((float(k), float(a)) for k, a in
                                d.get("initial", {}).get("seeds", ())),
                    uniform=d.get("initial", {}).get("uniform"),
                    background=float(d.get("initial", {}).get("background", 0.0)),
                ),
                sweep_seeds=tuple(float(k) for k in d.get("sweep_seeds", ())),
                sweep_background=float(d.get("sweep_background", 0.0)),
                reynolds_sweep=tuple(float(r) for r in d.get("reynolds_sweep", ())),
                output_dir=d.get("output_dir", "runs/out"),
            ).validate()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid run configuration: {exc}") from exc

    @classmethod
    def from_yaml(cls, text: str) -> "RunConfig":
        try:
            d = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config file: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config file must contain a mapping")
        return cls.from_dict(d)


def preset(name: str) -> RunConfig:
    """Named scenario presets; densities follow the standard protocols."""
    if name not in PRESET_BUILDERS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESET_BUILDERS)}")
    return PRESET_BUILDERS[name]()


def _fig1():
    return RunConfig(scenario="fig1", output_dir="runs/fig1")


def _fig2():
    return RunConfig(scenario="fig2",
                     initial=InitialSection(seeds=((3.0, 0.125),)),
                     output_dir="runs/fig2")


def _fig3():
    return RunConfig(scenario="fig3",
                     initial=InitialSection(seeds=((2.0, 0.1),), background=1e-5),
                     evolution=EvolutionSection(t_max=80.0),
                     output_dir="runs/fig3")


def _fig4():
    seeds = tuple(round(1.75 + 0.25 * i, 2) for i in range(16))  # 1.75 .. 5.5
    return RunConfig(scenario="fig4", sweep_seeds=seeds, sweep_background=1e-5,
                     initial=InitialSection(),
                     evolution=EvolutionSection(t_max=80.0),
                     output_dir="runs/fig4")


def _fig5a():
    return RunConfig(scenario="fig5a",
                     initial=InitialSection(seeds=((3.25, 0.2), (3.75, 0.2))),
                     output_dir="runs/fig5a")


def _fig5b():
    return RunConfig(scenario="fig5b",
                     initial=InitialSection(seeds=((3.25, 0.1), (3.75, 0.2))),
                     output_dir="runs/fig5b")


def _fig6():
    return RunConfig(scenario="fig6",
                     initial=InitialSection(seeds=((0.75, 0.1),)),
                     evolution=EvolutionSection(t_max=80.0),
                     output_dir="runs/fig6")


def _fig7():
    return RunConfig(scenario="fig7",
                     reynolds_sweep=(70.0, 75.0, 80.0, 85.0, 88.1),
                     evolution=EvolutionSection(t_max=120.0),
                     output_dir="runs/fig7")


def _table1():
    seeds = tuple(round(2.75 + 0.25 * i, 2) for i in range(10))  # 2.75 .. 5.0
    return RunConfig(scenario="table1", sweep_seeds=seeds, sweep_background=0.0,
                     evolution=EvolutionSection(t_max=80.0),
                     output_dir="runs/table1")


def _broadband_low():
    return RunConfig(scenario="broadband_low",
                     initial=InitialSection(uniform=0.01),
                     evolution=EvolutionSection(t_max=80.0),
                     output_dir="runs/broadband_low")


def _broadband_high():
    return RunConfig(scenario="broadband_high",
                     initial=InitialSection(uniform=0.1),
                     evolution=EvolutionSection(t_max=80.0),
                     output_dir="runs/broadband_high")


PRESET_BUILDERS = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5a": _fig5a,
    "fig5b": _fig5b,
    "fig6": _fig6,
    "fig7": _fig7,
    "table1": _table1,
    "broadband_low": _broadband_low,
    "broadband_high": _broadband_high,
}

PRESET_NOTES = {
    "fig1": "monochromatic (Landau) equilibrium amplitude curve; no time integration",
    "fig2": "single seed k=3 at density 0.125: equilibration with harmonic and mean flow",
    "fig3": "single seed k=2 at density 0.1 over 1e-5 noise: sideband decay to k=4",
    "fig4": "selection sweep, one seed at 0.1 per run over 1e-5 noise",
    "fig5a": "two equal seeds 0.2 at k=3.25 and 3.75",
    "fig5b": "seeds 0.1 at k=3.25 and 0.2 at k=3.75",
    "fig6": "linearly stable long wave k=0.75 at density 0.1",
    "fig7": "torque ratio versus Reynolds number (per-R kernel tables; slow)",
    "table1": "torque ratio for each stable wavenumber, zero-background seeds at 0.1",
    "broadband_low": "uniform density 0.01: fastest-growing mode wins",
    "broadband_high": "uniform density 0.1: critical-wavenumber mode wins",
}
