"""ドメインモデル - JVML_r の宣言、論理エンジン、インタプリタ、部分評価器、検証器"""
