import logging

from rich.console import Console

from nlgnn.rich_output import ReportPrinter, configure_logging


def recording_printer():
    return ReportPrinter(Console(record=True, width=120, color_system=None))


def test_format_cell():
    assert ReportPrinter.format_cell(None) == "-"
    assert ReportPrinter.format_cell("") == "-"
    assert ReportPrinter.format_cell(0.123456) == "0.1235"
    assert ReportPrinter.format_cell(7) == "7"


def test_table_contains_rows():
    printer = recording_printer()
    printer.print_table("bench", ["model", "display"], [{"model": "GCN", "display": "26.3 (1.0x)"}])
    text = printer.console.export_text()
    assert "GCN" in text and "26.3 (1.0x)" in text


def test_empty_table_reports_error():
    printer = recording_printer()
    printer.print_table("bench", ["model"], [])
    assert "没有结果" in printer.console.export_text()


def test_error_message_brackets_kept():
    printer = recording_printer()
    printer.print_error("未知模型: SAGE，可用: ['MLP', 'GCN']")
    assert "['MLP', 'GCN']" in printer.console.export_text()


def test_configure_logging_levels():
    logger = logging.getLogger("nlgnn")
    for verbosity, level in [(0, logging.WARNING), (1, logging.INFO), (3, logging.DEBUG)]:
        configure_logging(verbosity, Console(record=True))
        assert logger.level == level
        assert len(logger.handlers) == 1
