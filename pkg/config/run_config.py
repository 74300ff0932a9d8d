"""
Run configuration: an INI document read with configparser and validated
with pydantic models, one model per section
"""
import configparser
import hashlib
import json
import logging
import os
from typing import Annotated, Literal, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, field_validator, model_validator

from chain.models import RingChainSpec
from coupler.design import CouplerSpec
from utils.errors import ConfigError, SpecValidationError

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('steady', 'evolve', 'sweep', 'timegrid', 'hit', 'phase-avg', 'coupler')
SECTIONS = ('run', 'chain', 'geometry', 'coupler', 'sweep', 'options')


def _split_floats(value):
    """'0.5, 0.5' -> [0.5, 0.5]; a bare number becomes a one-item list"""
    if isinstance(value, str):
        items = [item.strip() for item in value.split(',')]
        return [item for item in items if item]
    if isinstance(value, (int, float)):
        return [value]
    return value


FloatList = Annotated[list[float], BeforeValidator(_split_floats)]


class Section(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class RunSection(Section):
    subcommand: str = Field(..., pattern=f"^({'|'.join(SUBCOMMANDS)})$")
    regime: Literal['classical', 'quantum'] = 'classical'
    format: Literal['csv', 'json'] = 'csv'


class ChainSection(Section):
    num_rings: int = Field(..., ge=1)
    couplings: FloatList
    loss_per_round: Optional[FloatList] = None
    phases: Optional[FloatList] = None


class GeometrySection(Section):
    radius: FloatList
    n_eff: float = Field(..., gt=0)
    wavelength: float = Field(..., gt=0)
    coupler_length: float = Field(default=0.0, ge=0)
    absorption: float = Field(default=0.0, ge=0)
    bending_loss: float = Field(default=0.0, ge=0)


class CouplerSection(Section):
    wavelength: float = Field(..., gt=0)
    n_eff1: float
    n_eff2: float
    bend_radius: float = Field(..., gt=0)
    gap: float = Field(default=0.0, ge=0)
    straight_length: float = Field(default=0.0, ge=0)
    min_coupling_distance: float = 0.0
    ridge_half_width: float = Field(default=0.0, ge=0)
    bend_loss_table: Optional[str] = None
    min_transmission: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    group_index: Optional[float] = Field(default=None, gt=0)
    gaps: Optional[FloatList] = None
    straight_lengths: Optional[FloatList] = None
    delta_n: Optional[FloatList] = None


class SweepSection(Section):
    axis1: Optional[str] = None
    axis1_start: Optional[float] = None
    axis1_stop: Optional[float] = None
    axis1_samples: Optional[int] = None
    axis2: Optional[str] = None
    axis2_start: Optional[float] = None
    axis2_stop: Optional[float] = None
    axis2_samples: Optional[int] = None
    metric: Optional[str] = None
    axis: Optional[str] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    samples: Optional[int] = None
    scenario: Optional[Literal[1, 2]] = None

    @field_validator('scenario', mode='before')
    @classmethod
    def _none_scenario(cls, value):
        if isinstance(value, str):
            value = value.strip().lower()
            return None if value in ('', 'none') else int(value)
        return value


class OptionsSection(Section):
    tol: Optional[float] = Field(default=None, gt=0)
    n_max: Optional[int] = Field(default=None, ge=1)
    samples: Optional[int] = Field(default=None, ge=2)
    p_g: Optional[float] = Field(default=None, gt=0, lt=1)
    threads: Optional[int] = Field(default=None, ge=1)
    max_steps: Optional[int] = Field(default=None, ge=1)


class RunConfig(Section):
    """Validated run description; exactly one of chain / coupler is present"""

    run: RunSection
    chain: Optional[ChainSection] = None
    geometry: Optional[GeometrySection] = None
    coupler: Optional[CouplerSection] = None
    sweep: SweepSection = SweepSection()
    options: OptionsSection = OptionsSection()

    @model_validator(mode='after')
    def _one_spec_section(self):
        if (self.chain is None) == (self.coupler is None):
            raise ValueError("exactly one of [chain] or [coupler] is required")
        if self.geometry is not None and self.chain is None:
            raise ValueError("[geometry] needs a [chain] section")
        if (self.run.subcommand == 'coupler') != (self.coupler is not None):
            raise ValueError("the coupler subcommand takes a [coupler] section, all others a [chain] section")
        return self

    def chain_spec(self) -> RingChainSpec:
        """Build the chain spec, deriving θ and α from [geometry] when present"""
        chain = self.chain
        n = chain.num_rings

        def per_ring(values):
            if values is None:
                return None
            return values[0] if len(values) == 1 else tuple(values)

        geometry = None
        if self.geometry is not None:
            g = self.geometry
            radius = g.radius * n if len(g.radius) == 1 else g.radius
            geometry = RingChainSpec.from_geometry(
                couplings=chain.couplings,
                radius=tuple(radius),
                n_eff=g.n_eff,
                wavelength=g.wavelength,
                coupler_length=g.coupler_length,
                absorption=g.absorption,
                bending_loss=g.bending_loss,
            ).geometry
        return RingChainSpec(
            num_rings=n,
            couplings=tuple(chain.couplings),
            loss_per_round=per_ring(chain.loss_per_round),
            phases=per_ring(chain.phases),
            geometry=geometry,
        )

    def coupler_spec(self) -> CouplerSpec:
        c = self.coupler
        return CouplerSpec(
            wavelength=c.wavelength,
            n_eff1=c.n_eff1,
            n_eff2=c.n_eff2,
            gap=c.gap,
            straight_length=c.straight_length,
            min_coupling_distance=c.min_coupling_distance,
            ridge_half_width=c.ridge_half_width,
            bend_radius=c.bend_radius,
        )

    def resolved(self, options: OptionsSection) -> dict:
        """Full configuration as written into output headers"""
        data = self.model_dump(mode='json', exclude_none=True)
        data['options'] = options.model_dump(mode='json')
        return data


def config_digest(resolved: dict) -> str:
    return hashlib.sha256(json.dumps(resolved, sort_keys=True).encode('utf-8')).hexdigest()


def resolve_options(config: Optional[RunConfig], defaults: dict, overrides: dict) -> OptionsSection:
    """
    Merge numeric options: CLI overrides > [options] > environment defaults

    Args:
        config: parsed run config, or None
        defaults: Settings.get_numeric_defaults()
        overrides: values given on the command line (None means unset)
    """
    merged = dict(defaults)
    if config is not None:
        merged.update(config.options.model_dump(exclude_none=True))
    merged.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return OptionsSection(**merged)
    except ValidationError as e:
        raise SpecValidationError(f"invalid options: {_summarize(e)}") from e


def _summarize(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = '.'.join(str(part) for part in item['loc'])
        parts.append(f"{location}: {item['msg']}" if location else item['msg'])
    return '; '.join(parts)


def parse_run_config(text: str, source: str = '<string>') -> RunConfig:
    """Parse INI text into a validated RunConfig"""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigError(f"cannot parse {source}: {e}") from e

    unknown = [name for name in parser.sections() if name not in SECTIONS]
    if unknown:
        raise ConfigError(f"unknown section(s) in {source}: {', '.join(unknown)}")
    if not parser.has_section('run'):
        raise ConfigError(f"{source} has no [run] section")

    data = {name: dict(parser.items(name)) for name in parser.sections()}
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise SpecValidationError(f"invalid run config {source}: {_summarize(e)}") from e
    logger.debug(f"Run config {source}: subcommand={config.run.subcommand}, regime={config.run.regime}")
    return config


def load_run_config(path: str) -> RunConfig:
    """Read and validate a run config file"""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    return parse_run_config(text, source=path)
