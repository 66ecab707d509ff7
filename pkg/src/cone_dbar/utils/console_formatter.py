"""
Console Formatter for the verification harness
Renders verdicts and summary tables for the terminal
"""

from typing import List, Dict, Any


class ConsoleFormatter:
    """Formats check and sweep results for console display"""

    @staticmethod
    def _verdict(passed: bool) -> str:
        return "✅ PASS" if passed else "❌ FAIL"

    @staticmethod
    def format_check_summary(title: str, summary: Dict[str, Any]) -> str:
        """One block per check: verdict plus the scalar entries of the summary"""
        output = []
        output.append("=" * 80)
        output.append(f"🔍 {title.upper()}")
        output.append("=" * 80)
        output.append(f"   Verdict: {ConsoleFormatter._verdict(bool(summary.get('passed')))}")
        output.append("-" * 40)
        for key in sorted(summary):
            value = summary[key]
            # one level of nesting: holder.max_ratio, per_operator_passed.L1, ...
            entries = sorted(value.items()) if isinstance(value, dict) else [(None, value)]
            for inner, item in entries:
                label = key if inner is None else f"{key}.{inner}"
                if isinstance(item, bool):
                    output.append(f"   {label:<32} {'yes' if item else 'no'}")
                elif isinstance(item, float):
                    output.append(f"   {label:<32} {item:.6g}")
                elif isinstance(item, (int, str)):
                    output.append(f"   {label:<32} {item}")
        output.append("=" * 80)
        return "\n".join(output)

    @staticmethod
    def format_estimate_summary(summary: Dict[str, Any]) -> str:
        """Sweep summary: max ratio per radius and per resolution"""
        output = []
        output.append("=" * 80)
        output.append(f"📈 ESTIMATE {summary.get('case')} {summary.get('parameters') or ''}")
        output.append("=" * 80)

        max_ratio = summary.get('max_ratio')
        ratio_text = f"{max_ratio:.6g}" if isinstance(max_ratio, float) else "n/a"
        output.append(f"   Max ratio (empirical constant): {ratio_text}")
        output.append(f"   Stable under refinement: {'yes' if summary.get('stable') else 'no'}")
        output.append(f"   Resolutions: {summary.get('n_list')}")

        per_radius = summary.get('per_radius_max') or {}
        if per_radius:
            output.append("")
            output.append("📋 PER-RADIUS MAX RATIO")
            output.append("-" * 40)
            for radius, value in per_radius.items():
                output.append(f"   r = {float(radius):<10.5g} {value:.6g}")

        failed = summary.get('failed_rows', 0)
        degenerate = summary.get('degenerate_rows', 0)
        if failed or degenerate:
            output.append("")
            output.append(f"   ⚠️  failed rows: {failed}, degenerate rows: {degenerate}")

        output.append("")
        output.append(f"   Verdict: {ConsoleFormatter._verdict(bool(summary.get('passed')))}")
        output.append("=" * 80)
        return "\n".join(output)

    @staticmethod
    def format_report_table(summaries: List[Dict[str, Any]]) -> str:
        """Table of every collected summary"""
        output = []
        output.append("=" * 80)
        output.append("📊 VERIFICATION REPORT")
        output.append("=" * 80)
        if not summaries:
            output.append("❌ No summaries found in the output directory.")
            output.append("=" * 80)
            return "\n".join(output)

        for i, summary in enumerate(summaries, 1):
            passed = bool(summary.get('passed', summary.get('stable', False)))
            indicator = "🟢" if passed else "🔴"
            name = summary.get('summary_file', '?').replace('_summary.json', '')
            max_ratio = summary.get('max_ratio')
            ratio_text = f"{max_ratio:>12.5g}" if isinstance(max_ratio, float) else f"{'':>12}"
            output.append(f"   {i:2d}. {indicator} {name:<36} {ratio_text}")

        output.append("=" * 80)
        return "\n".join(output)

    @staticmethod
    def format_progress_message(message: str, step: int = None, total_steps: int = None) -> str:
        """Format progress messages for console display"""
        if step and total_steps:
            progress = f"[{step}/{total_steps}] "
        else:
            progress = ""
        return f"🔄 {progress}{message}"

    @staticmethod
    def format_success_message(message: str) -> str:
        return f"✅ {message}"

    @staticmethod
    def format_error_message(message: str) -> str:
        return f"❌ {message}"

    @staticmethod
    def format_info_message(message: str) -> str:
        return f"💡 {message}"
