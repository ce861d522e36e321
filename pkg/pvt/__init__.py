"""
Симулятор гибридного PV/T коллектора (фотоэлектрика + нагрев воды).

Модули:
- model_params     - входные записи и их загрузка;
- thermal_model    - коэффициенты теплопотерь и температурная цепочка;
- electrical_model - однодиодная модель, I-V кривые, MPP;
- sim_engine       - прогон по погоде, КПД, сравнение с экспериментом;
- cli              - командная строка (python -m pvt).
"""
