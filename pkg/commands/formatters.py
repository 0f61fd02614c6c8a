"""
Форматирование консольных сводок для команд wavefarm

Содержит функции для отображения результатов генерации данных, обучения,
валидации и оптимизации
"""

from typing import Any, Dict, List


def _rule(title: str) -> List[str]:
    return [title, "-" * len(title)]


def _number(value: Any) -> str:
    return f"{value:.6g}" if isinstance(value, (int, float)) else "N/A"


def format_dataset_summary(summary: Dict[str, Any]) -> str:
    """
    Форматирует итог генерации данных

    Args:
        summary: Словарь со счетчиками записей и путями файлов

    Returns:
        Текст сводки
    """
    lines = _rule("📦 Training data")
    lines += [
        f"one-body records : {summary.get('one_records', 0)}",
        f"two-body records : {summary.get('two_records', 0)}",
        f"source           : {summary.get('source', 'oracle')}",
        f"LHS seed         : {summary.get('seed', 'N/A')}",
    ]
    for name, path in summary.get("files", {}).items():
        lines.append(f"• {name}: {path}")
    return "\n".join(lines)


def format_metrics_table(metrics: Dict[str, float], mode: str = "ann") -> str:
    """
    Таблица RMSE по моделям (нормированные величины)

    Args:
        metrics: {"one.a.shape": rmse, ...}
        mode: режим бандла

    Returns:
        Текст таблицы
    """
    if mode == "oracle":
        return "\n".join(_rule("🧠 Surrogate bundle") + ["oracle bypass mode: no networks trained"])
    lines = _rule(f"🧠 Surrogate bundle ({len(metrics)} models)")
    width = max((len(name) for name in metrics), default=10)
    lines.append(f"{'model'.ljust(width)}  test RMSE")
    for name in sorted(metrics):
        flag = "✅" if metrics[name] < 0.05 else "⚠️"
        lines.append(f"{name.ljust(width)}  {metrics[name]:.5f} {flag}")
    return "\n".join(lines)


def format_validation(errors: Dict[str, Dict[str, Dict[str, float]]]) -> str:
    """
    Сводка сравнения суррогата с оракулом

    Args:
        errors: {"single": {"a": {"max_rel": .., "mean_rel": ..}}, "pair": {...}}
    """
    lines = _rule("🔍 Surrogate vs oracle")
    for case, per_target in errors.items():
        lines.append(f"{case}:")
        for name, err in per_target.items():
            lines.append(f"  {name:<4} max {err['max_rel']:.3e}  mean {err['mean_rel']:.3e}")
    return "\n".join(lines)


def format_optimization(report: Dict[str, Any]) -> str:
    """
    Форматирует итог оптимизации

    Args:
        report: Документ отчета оптимизации

    Returns:
        Текст сводки
    """
    status = "✅ feasible" if report.get("feasible") else "❌ infeasible"
    lines = _rule(f"🌊 Optimization N={report.get('n_wec')} ({status})")
    lines += [
        f"R = {report['radius']:.4f} m, D = {report['draft']:.4f} m",
        f"p_v = {_number(report.get('p_v'))} W/m3",
        f"evaluations = {report.get('evaluations')}, seed = {report.get('seed')}",
    ]
    if report.get("q_factor") is not None:
        lines.append(f"q-factor = {report['q_factor']:.4f}")
    if report.get("baseline_objective") is not None:
        lines.append(f"random baseline objective = {report['baseline_objective']:.6g}")
    for i, (x, y) in enumerate(report.get("layout", []), start=1):
        lines.append(f"• WEC {i}: ({x:9.2f}, {y:9.2f}) m  K={report['stiffness'][i - 1]:.4g}  "
                     f"B={report['damping'][i - 1]:.4g}")
    return "\n".join(lines)


def format_report_table(rows: List[Dict[str, Any]]) -> str:
    """Сводная таблица нескольких запусков"""
    lines = _rule(f"📊 Consolidated report ({len(rows)} runs)")
    lines.append(f"{'N':>3} {'R':>8} {'D':>8} {'p_v':>14} {'runtime':>10} {'seed':>6}")
    for row in rows:
        runtime = row.get("wall_time")
        runtime_text = f"{runtime:.2f}s" if isinstance(runtime, (int, float)) else "N/A"
        lines.append(f"{row['n_wec']:>3} {row['radius']:>8.3f} {row['draft']:>8.3f} "
                     f"{_number(row.get('p_v')):>14} {runtime_text:>10} {row['seed']:>6}")
    return "\n".join(lines)
