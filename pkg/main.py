#!/usr/bin/env python3
"""
wavefarm - Main Entry Point

Пакетный драйвер конвейера: данные -> суррогат -> оптимизация фермы.

Использование:
    python main.py gen-data                       # Датасеты 1- и 2-тельных задач
    python main.py train                          # Обучение 30 моделей суррогата
    python main.py validate                       # Сравнение суррогата с оракулом
    python main.py optimize --set optimizer.n_wec=5
    python main.py report runs/optimize_N3.json runs/optimize_N5.json

Коды выхода: 0 успех, 2 ошибка конфигурации, 3 ошибка данных, 4 недопустимый результат.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import structlog

# Добавляем корневую директорию в Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from commands.data_commands import cmd_gen_data  # noqa: E402
from commands.formatters import (  # noqa: E402
    format_dataset_summary, format_metrics_table, format_optimization, format_report_table, format_validation,
)
from commands.optimize_commands import cmd_optimize, cmd_report  # noqa: E402
from commands.surrogate_commands import cmd_train, cmd_validate  # noqa: E402
from config.run_config import load_run_config  # noqa: E402
from config.settings import settings  # noqa: E402
from core.artifact_store import ArtifactStore  # noqa: E402
from core.exceptions import WaveFarmError  # noqa: E402

COMMANDS = ("gen-data", "train", "validate", "optimize", "report")


def setup_logging(log_dir: Path, debug: bool = False):
    """Настраивает логирование: консоль, общий лог и лог ошибок в <out>/logs"""
    log_dir.mkdir(parents=True, exist_ok=True)
    level = logging.DEBUG if debug else logging.INFO

    pre_chain = [
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="%Y-%m-%d %H:%M:%S"),
    ]
    console_formatter = structlog.stdlib.ProcessorFormatter(
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        foreign_pre_chain=pre_chain,
    )
    file_formatter = structlog.stdlib.ProcessorFormatter(
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            structlog.processors.format_exc_info,
            structlog.processors.KeyValueRenderer(key_order=["timestamp", "level", "logger", "event"]),
        ],
        foreign_pre_chain=pre_chain,
    )

    logger = logging.getLogger()
    logger.setLevel(level)

    # Закрываем и очищаем существующие обработчики
    for handler in list(logger.handlers):
        handler.close()
    logger.handlers.clear()

    # Консольный обработчик
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(level)
    console_handler.setFormatter(console_formatter)
    logger.addHandler(console_handler)

    # Общий файловый обработчик
    file_handler = logging.FileHandler(log_dir / "wavefarm.log", encoding="utf-8")
    file_handler.setLevel(level)
    file_handler.setFormatter(file_formatter)
    logger.addHandler(file_handler)

    # Обработчик ошибок
    error_handler = logging.FileHandler(log_dir / "wavefarm_errors.log", encoding="utf-8")
    error_handler.setLevel(logging.ERROR)
    error_handler.setFormatter(file_formatter)
    logger.addHandler(error_handler)


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Парсит аргументы командной строки"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON-файл конфигурации")
    common.add_argument("--preset", choices=["desk", "paper"], help="Набор параметров по умолчанию")
    common.add_argument("--seed", type=int, help="Зерно генераторов случайных чисел")
    common.add_argument("--threads", type=int, help="Максимум рабочих потоков")
    common.add_argument("--out", help="Каталог результатов (по умолчанию WAVEFARM_OUTPUT_DIR)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Переопределение параметра, например network.max_epochs=500")
    common.add_argument("--debug", action="store_true", help="Включить отладочные логи")

    parser = argparse.ArgumentParser(
        description="wavefarm - surrogate-assisted WEC farm design",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Примеры использования:
  python main.py gen-data --preset paper
  python main.py train --set surrogate.mode=oracle
  python main.py optimize --seed 3 --set optimizer.n_wec=5
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        command = sub.add_parser(name, parents=[common])
        if name == "report":
            command.add_argument("reports", nargs="*", help="Отчеты optimize (по умолчанию все в --out)")
    return parser.parse_args(argv)


def run_command(args: argparse.Namespace) -> int:
    logger = logging.getLogger(__name__)
    cfg = load_run_config(args.preset, args.config, args.overrides, seed=args.seed, threads=args.threads)
    store = ArtifactStore(args.out_dir)
    logger.info(f"[MAIN] {args.command}: preset={cfg.preset} seed={cfg.seed} threads={cfg.threads} "
                f"out={store.root}")

    if args.command == "gen-data":
        print(format_dataset_summary(cmd_gen_data(cfg, store)))
    elif args.command == "train":
        summary = cmd_train(cfg, store)
        print(format_metrics_table(summary["metrics"], summary["mode"]))
    elif args.command == "validate":
        print(format_validation(cmd_validate(cfg, store)["errors"]))
    elif args.command == "optimize":
        print(format_optimization(cmd_optimize(cfg, store)))
    elif args.command == "report":
        print(format_report_table(cmd_report(cfg, store, args.reports)))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Главная функция: возвращает код выхода"""
    args = parse_arguments(argv)
    logger = logging.getLogger(__name__)
    try:
        settings.verify_settings()
        args.out_dir = Path(args.out) if args.out else settings.output_dir
        setup_logging(args.out_dir / "logs", args.debug)
        return run_command(args)
    except WaveFarmError as e:
        logger.error(f"[MAIN] ❌ {type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.info("[MAIN] ⏹️ Остановка по запросу пользователя")
        return 130
    except Exception as e:
        logger.error(f"[MAIN] ❌ Критическая ошибка: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
