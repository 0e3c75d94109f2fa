"""プレゼンテーション層 - コマンドラインインターフェース"""
