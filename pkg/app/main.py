import argparse
import logging
import sys
from typing import Dict, List, Optional

from pydantic import ValidationError

from app import __version__
from app.config import settings
from app.core.errors import GeofluxError, UsageError
from app.core.utils import read_keyvalue_file
from app.db.models import EXPERIMENT_SUBCOMMANDS, CommandSpec, ExperimentConfig
from app.db.storage import format_report, open_store
from app.routes import COMMANDS

# Configurar logging
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

LIST_FIELDS = ("t_grid", "deltas", "lags")
FLAG_NAMES = {"master_seed": "--seed"}


# ============================================
# PARSER
# ============================================

class UsageParser(argparse.ArgumentParser):
    """ArgumentParser que lanza UsageError en lugar de terminar el proceso"""

    def error(self, message):
        raise UsageError(f"{self.format_usage().strip()}\n{self.prog}: error: {message}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"lista de reales separada por comas inválida: {text!r}")


def _seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"semilla entera inválida: {text!r}")


def build_parser() -> UsageParser:
    parser = UsageParser(
        prog="geoflux",
        description="Autointersecciones de geodésicas aleatorias en superficies hiperbólicas",
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("subcommand", choices=list(EXPERIMENT_SUBCOMMANDS))

    flags = parser.add_argument_group("experimento")
    flags.add_argument("--config", dest="config_file", help="archivo key=value (los flags lo sobrescriben)")
    flags.add_argument("--seed", dest="master_seed", type=_seed)
    flags.add_argument("--surface")
    flags.add_argument("--t-grid", dest="t_grid", type=_float_list)
    flags.add_argument("--replicas", type=int)
    flags.add_argument("--delta", type=float)
    flags.add_argument("--alpha", type=float)
    flags.add_argument("--rho", type=float)
    flags.add_argument("--f-center-re", dest="f_center_re", type=float)
    flags.add_argument("--f-center-im", dest="f_center_im", type=float)
    flags.add_argument("--f-radius", dest="f_radius", type=float)
    flags.add_argument("--f-height", dest="f_height", type=float)
    flags.add_argument("--output")
    flags.add_argument("--t-star", dest="t_star", type=float)
    flags.add_argument("--samples", type=int)
    flags.add_argument("--probes", type=int)
    flags.add_argument("--traces", type=int)
    flags.add_argument("--trace-time", dest="trace_time", type=float)
    flags.add_argument("--deltas", type=_float_list)
    flags.add_argument("--quad-step", dest="quad_step", type=float)
    flags.add_argument("--lags", type=_float_list)
    flags.add_argument("--n-steps", dest="n_steps", type=int)
    flags.add_argument("--starts", type=int)
    return parser


def _flag_for(field: str) -> str:
    return FLAG_NAMES.get(field, "--" + field.replace("_", "-"))


def _file_values(path: str) -> Dict:
    values: Dict = {}
    known = set(ExperimentConfig.model_fields) | {"seed"}
    for key, raw in read_keyvalue_file(path).items():
        if key not in known:
            raise UsageError(f"{path}: clave desconocida {key!r}", flag="--config")
        field = "master_seed" if key == "seed" else key
        if field in LIST_FIELDS:
            values[field] = [item.strip() for item in raw.split(",") if item.strip()]
        elif field == "master_seed":
            try:
                values[field] = int(raw, 0)
            except ValueError:
                raise UsageError(f"{path}: semilla entera inválida {raw!r}", flag="--config")
        else:
            values[field] = raw
    return values


def _usage_from_validation(error: ValidationError) -> UsageError:
    first = error.errors()[0]
    message = first.get("msg", str(error))
    field = first["loc"][0] if first.get("loc") else ""
    if not field:
        # Errores de modelo: el mensaje empieza por el nombre del campo
        head = message.replace("Value error, ", "").split(" ")[0].rstrip(":")
        field = head if head in ExperimentConfig.model_fields else ""
    flag = _flag_for(str(field)) if field else ""
    return UsageError(f"{flag}: {message}" if flag else message, flag=flag)


def parse(args: List[str]) -> CommandSpec:
    """
    Interpretar la línea de comandos

    Orden de precedencia: valores por defecto, archivo --config, flags.

    Raises:
        UsageError: subcomando o flag desconocido, valor inválido o --seed ausente
    """
    namespace = vars(build_parser().parse_args(args))
    subcommand = namespace.pop("subcommand")
    config_file = namespace.pop("config_file", None)

    merged = _file_values(config_file) if config_file else {}
    merged.update(namespace)
    if merged.get("master_seed") is None:
        raise UsageError(f"{subcommand}: --seed es obligatorio", flag="--seed")

    try:
        config = ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        raise _usage_from_validation(e)
    return CommandSpec(subcommand=subcommand, config=config)


# ============================================
# EJECUCIÓN
# ============================================

def run(cmd: CommandSpec) -> int:
    """
    Ejecutar el subcomando, escribir artefactos e imprimir el reporte

    Returns:
        0 si termina bien, 2 si falla un umbral de aceptación, 1 ante errores de ejecución o E/S
    """
    handler = COMMANDS[cmd.subcommand]
    logger.info(f"🚀 {cmd.subcommand} (seed {cmd.config.master_seed}) → {cmd.config.output}")
    try:
        store = open_store(cmd.config.output)
        report = handler(cmd.config, store)
        values = {"subcommand": cmd.subcommand, "seed": cmd.config.master_seed, **report.values}
        if report.passed is not None:
            values["passed"] = report.passed
        store.write_report(values)
    except OSError as e:
        logger.error(f"❌ Error de E/S: {e}")
        return 1
    except GeofluxError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return 1

    sys.stdout.write(format_report(values))
    if report.passed is False:
        logger.warning(f"⚠️ {cmd.subcommand}: umbral de aceptación no superado")
        return 2
    logger.info(f"✅ {cmd.subcommand} completado")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    try:
        cmd = parse(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return 2
    return run(cmd)
