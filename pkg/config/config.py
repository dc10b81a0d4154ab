import math

from dotenv import load_dotenv
from path import Path
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field

from utils.validators import QuadControl, SeriesControl, StepControl, TailPolicy


class Settings(BaseSettings):
    """
    Process-wide defaults, read from ``GSQG_*`` environment variables after
    ``config.dev.env`` (if present) has been loaded into the environment.
    """
    model_config = SettingsConfigDict(env_prefix='GSQG_', env_file_encoding='utf-8', extra='ignore')

    output_dir: str = "results"
    log_dir: str = "logs"
    log_level: str = "INFO"
    seed: int = Field(12345, ge=0)
    max_workers: int = Field(4, ge=1)

    series_max_terms: int = Field(200_000, ge=1)
    series_abs_tol: float = Field(1e-16, ge=0)
    series_tail_tol: float = Field(1e-9, ge=0)
    quad_abs_tol: float = Field(1e-10, gt=0)
    quad_max_subdivisions: int = Field(200, ge=1)
    gamma_floor: float = Field(1e-12, gt=0, lt=1)
    ode_rtol: float = Field(1e-10, gt=0)
    ode_atol: float = Field(1e-12, gt=0)
    plot_dpi: int = Field(120, ge=10)

    def __init__(self, **kwargs):
        env_file: Path = Path(__file__).parent.parent / "config.dev.env"
        if env_file.exists():
            load_dotenv(dotenv_path=env_file, override=False)
        super().__init__(**kwargs)

    def series_control(self) -> SeriesControl:
        return SeriesControl(max_terms=self.series_max_terms, abs_tol=self.series_abs_tol,
                             tail_policy=TailPolicy.TAIL_BOUND, tail_tol=self.series_tail_tol)

    def quad_control(self) -> QuadControl:
        return QuadControl(abs_tol=self.quad_abs_tol, max_subdivisions=self.quad_max_subdivisions)

    def step_control(self) -> StepControl:
        return StepControl(rtol=self.ode_rtol, atol=self.ode_atol, max_step=math.inf)
