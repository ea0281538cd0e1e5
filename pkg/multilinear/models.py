from django.db import models


class RunReport(models.Model):
    command = models.CharField(max_length=32)
    config = models.JSONField(default=dict)
    result = models.JSONField(default=dict)
    wall_time = models.FloatField(default=0.0)
    ring_ops = models.BigIntegerField(default=0)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.command} - {self.created_at}"
